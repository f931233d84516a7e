"""Small numpy MLPs with hand-written backprop and Adam.

Checkpoint layout (little-endian)::

    b"IRSMLP01"                      magic
    uint32 L                         number of layer sizes
    uint32 sizes[L]
    uint8  output activation         0 = identity, 1 = tanh
    float64 params                   per layer: W (fan_in x fan_out, row-major), then b

Adam state files use magic b"IRSADAM1", then uint64 step, float64 lr, beta1,
beta2, eps, uint32 count, and for each parameter uint32 ndim, uint32 shape[ndim],
float64 m (row-major), float64 v (row-major).
"""
from __future__ import annotations

import struct

import numpy as np

_ACTS = {"identity": 0, "tanh": 1}
_MLP_MAGIC = b"IRSMLP01"
_ADAM_MAGIC = b"IRSADAM1"


class Mlp:
    """ReLU hidden layers, tanh or identity output, float64 throughout."""

    def __init__(self, sizes, output="identity", rng=None, final_scale=1.0):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"bad layer sizes {sizes}")
        if output not in _ACTS:
            raise ValueError(f"unknown output activation {output!r}")
        self.sizes = sizes
        self.output = output
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params: list[np.ndarray] = []
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            scale = final_scale if i == len(sizes) - 2 else 1.0
            self.params.append(rng.uniform(-bound, bound, (fan_in, fan_out)) * scale)
            self.params.append(rng.uniform(-bound, bound, fan_out) * scale)

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x) -> np.ndarray:
        return self.forward_cached(x)[0]

    __call__ = forward

    def forward_cached(self, x):
        """Return (output, cache); cache feeds ``backward``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {h.shape[1]} != {self.sizes[0]}")
        acts = [h]
        for i in range(self.n_layers):
            z = h @ self.params[2 * i] + self.params[2 * i + 1]
            if i < self.n_layers - 1:
                h = np.maximum(z, 0.0)
            elif self.output == "tanh":
                h = np.tanh(z)
            else:
                h = z
            acts.append(h)
        out = h[0] if single else h
        return out, (acts, single)

    def backward(self, cache, grad_out):
        """Reverse-mode pass; returns (param grads, grad wrt input)."""
        acts, single = cache
        g = np.asarray(grad_out, dtype=float)
        if single:
            g = g[None, :]
        grads = [None] * len(self.params)
        for i in reversed(range(self.n_layers)):
            out = acts[i + 1]
            if i == self.n_layers - 1:
                if self.output == "tanh":
                    g = g * (1.0 - out * out)
            else:
                g = g * (out > 0.0)
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.params[2 * i].T
        return grads, (g[0] if single else g)

    def copy(self) -> "Mlp":
        new = Mlp.__new__(Mlp)
        new.sizes = list(self.sizes)
        new.output = self.output
        new.params = [p.copy() for p in self.params]
        return new

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_MLP_MAGIC)
            fh.write(struct.pack("<I", len(self.sizes)))
            fh.write(struct.pack(f"<{len(self.sizes)}I", *self.sizes))
            fh.write(struct.pack("<B", _ACTS[self.output]))
            for p in self.params:
                fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "Mlp":
        with open(path, "rb") as fh:
            if fh.read(8) != _MLP_MAGIC:
                raise ValueError(f"{path}: not an MLP checkpoint")
            (L,) = struct.unpack("<I", fh.read(4))
            sizes = list(struct.unpack(f"<{L}I", fh.read(4 * L)))
            (code,) = struct.unpack("<B", fh.read(1))
            output = {v: k for k, v in _ACTS.items()}[code]
            net = cls.__new__(cls)
            net.sizes, net.output, net.params = sizes, output, []
            for a, b in zip(sizes[:-1], sizes[1:]):
                net.params.append(np.frombuffer(fh.read(8 * a * b), "<f8").reshape(a, b).copy())
                net.params.append(np.frombuffer(fh.read(8 * b), "<f8").copy())
            if fh.read(1):
                raise ValueError(f"{path}: trailing bytes")
        return net


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        """In-place update of ``params``."""
        if len(params) != len(self.m):
            raise ValueError("parameter count changed")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        step = self.lr / (1.0 - b1 ** self.t)
        root_c2 = np.sqrt(1.0 - b2 ** self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            tmp = g * g
            tmp *= 1.0 - b2
            v += tmp
            # lr * m_hat / (sqrt(v_hat) + eps), reusing one scratch array
            np.sqrt(v, out=tmp)
            tmp /= root_c2
            tmp += self.eps
            np.divide(m, tmp, out=tmp)
            tmp *= step
            p -= tmp

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_ADAM_MAGIC)
            fh.write(struct.pack("<Q4d", self.t, self.lr, self.beta1, self.beta2, self.eps))
            fh.write(struct.pack("<I", len(self.m)))
            for m, v in zip(self.m, self.v):
                fh.write(struct.pack("<I", m.ndim))
                fh.write(struct.pack(f"<{m.ndim}I", *m.shape))
                fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())
                fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "Adam":
        with open(path, "rb") as fh:
            if fh.read(8) != _ADAM_MAGIC:
                raise ValueError(f"{path}: not an Adam checkpoint")
            t, lr, b1, b2, eps = struct.unpack("<Q4d", fh.read(40))
            (count,) = struct.unpack("<I", fh.read(4))
            opt = cls([], lr, b1, b2, eps)
            opt.t = t
            for _ in range(count):
                (ndim,) = struct.unpack("<I", fh.read(4))
                shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
                n = int(np.prod(shape))
                opt.m.append(np.frombuffer(fh.read(8 * n), "<f8").reshape(shape).copy())
                opt.v.append(np.frombuffer(fh.read(8 * n), "<f8").reshape(shape).copy())
        return opt


def adam_step(params, grads, state: Adam):
    state.step(params, grads)
    return params


def clip_by_global_norm(grads, max_norm: float):
    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if norm > max_norm > 0:
        scale = max_norm / norm
        return [g * scale for g in grads], norm
    return grads, norm


def soft_update(target: Mlp, online: Mlp, kappa: float) -> None:
    """target <- kappa * online + (1 - kappa) * target, in place."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    if target.sizes != online.sizes:
        raise ValueError("target and online shapes differ")
    for t, o in zip(target.params, online.params):
        if kappa == 1.0:
            t[...] = o
        else:
            t *= 1.0 - kappa
            t += kappa * o


def numeric_gradients(f, params, h=1e-5):
    """Central differences of scalar f() with respect to each array in params."""
    out = []
    for p in params:
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = f()
            flat[i] = orig - h
            fm = f()
            flat[i] = orig
            gflat[i] = (fp - fm) / (2 * h)
        out.append(g)
    return out


def max_relative_error(analytic, numeric, floor=1e-6) -> float:
    """max |a - n| / max(|a|, |n|, floor) over all entries."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def check_gradients(net: Mlp, x, seed, h=1e-5) -> float:
    """Max relative error of backprop for the scalar loss sum(seed * net(x))."""
    seed = np.asarray(seed, dtype=float)
    _, cache = net.forward_cached(x)
    analytic, _ = net.backward(cache, seed)
    numeric = numeric_gradients(lambda: float(np.sum(seed * net(x))), net.params, h)
    return max_relative_error(analytic, numeric)
