"""Clipped-surrogate PPO with a diagonal Gaussian policy and one-step TD advantages."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nn import Adam, Mlp, clip_by_global_norm

LOG_STD_MIN, LOG_STD_MAX = -5.0, 1.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def clipped_objective(p, A, epsilon):
    """min(p A, clip(p, 1 - eps, 1 + eps) A), elementwise."""
    p = np.asarray(p, dtype=float)
    A = np.asarray(A, dtype=float)
    out = np.minimum(p * A, np.clip(p, 1.0 - epsilon, 1.0 + epsilon) * A)
    return float(out) if out.ndim == 0 else out


def advantage(r, v_s, v_next, zeta):
    """A = r + zeta V(s') - V(s)."""
    return r + zeta * v_next - v_s


class GaussianPolicy:
    def __init__(self, state_dim, action_dim, hidden=(128, 128), log_std=np.log(0.5), rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.mean = Mlp([state_dim, *hidden, action_dim], "tanh", rng, final_scale=1e-3)
        self.log_std = np.full(action_dim, float(log_std))
        self.clamp_log_std()

    @property
    def action_dim(self) -> int:
        return self.mean.sizes[-1]

    def clamp_log_std(self):
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)

    @property
    def params(self):
        return self.mean.params + [self.log_std]

    def log_prob(self, s, a) -> np.ndarray:
        mu = self.mean(s)
        return gaussian_log_prob(a, mu, self.log_std)

    def sample(self, s, rng):
        """Pre-clamp sample and its log-density."""
        mu = self.mean(s)
        raw = mu + np.exp(self.log_std) * rng.standard_normal(mu.shape)
        return raw, gaussian_log_prob(raw, mu, self.log_std)


def gaussian_log_prob(a, mu, log_std):
    z = (a - mu) * np.exp(-log_std)
    return np.sum(-0.5 * z * z - log_std - _HALF_LOG_2PI, axis=-1)


def ratio(policy: GaussianPolicy, s, a, log_prob_old):
    return np.exp(policy.log_prob(s, a) - log_prob_old)


@dataclass
class PpoConfig:
    policy_lr: float = 1e-5
    value_lr: float = 1e-4
    zeta: float = 0.9
    epsilon: float = 0.2
    horizon: int = 2048
    epochs: int = 10
    batch_size: int = 32
    hidden: tuple = (128, 128)
    init_log_std: float = float(np.log(0.5))
    normalize_advantages: bool = True
    grad_clip: float | None = None


@dataclass
class RolloutBuffer:
    s: list = field(default_factory=list)
    a: list = field(default_factory=list)
    r: list = field(default_factory=list)
    s_next: list = field(default_factory=list)
    log_prob: list = field(default_factory=list)

    def add(self, s, a, r, s_next, log_prob):
        self.s.append(s)
        self.a.append(a)
        self.r.append(r)
        self.s_next.append(s_next)
        self.log_prob.append(log_prob)

    def __len__(self):
        return len(self.r)

    def clear(self):
        for lst in (self.s, self.a, self.r, self.s_next, self.log_prob):
            lst.clear()

    def arrays(self):
        return (np.array(self.s), np.array(self.a), np.array(self.r, dtype=float),
                np.array(self.s_next), np.array(self.log_prob, dtype=float))


class PpoAgent:
    def __init__(self, state_dim, action_dim, cfg: PpoConfig | None = None, rng=None):
        self.cfg = cfg = cfg or PpoConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.policy = GaussianPolicy(state_dim, action_dim, cfg.hidden, cfg.init_log_std, self.rng)
        self.value = Mlp([state_dim, *cfg.hidden, 1], "identity", self.rng)
        self.policy_opt = Adam(self.policy.params, cfg.policy_lr)
        self.value_opt = Adam(self.value.params, cfg.value_lr)
        self.rollout = RolloutBuffer()

    @property
    def action_dim(self) -> int:
        return self.policy.action_dim

    def act(self, s):
        """Return (clamped action, log_prob, pre-clamp sample)."""
        raw, lp = self.policy.sample(s, self.rng)
        return np.clip(raw, -1.0, 1.0), float(lp), raw

    def act_greedy(self, s) -> np.ndarray:
        return self.policy.mean(s)

    def store(self, s, raw_action, r, s_next, log_prob):
        self.rollout.add(s, raw_action, r, s_next, log_prob)

    def ready(self) -> bool:
        return len(self.rollout) >= self.cfg.horizon

    def advantages(self, r, s, s_next) -> np.ndarray:
        return advantage(r, self.value(s)[:, 0], self.value(s_next)[:, 0], self.cfg.zeta)

    def surrogate(self, s, a, log_prob_old, A) -> float:
        return float(np.mean(clipped_objective(ratio(self.policy, s, a, log_prob_old), A,
                                               self.cfg.epsilon)))

    def policy_gradients(self, s, a, log_prob_old, A):
        """(mean clipped surrogate, grads of its negation) for mean-net params + log_std."""
        eps = self.cfg.epsilon
        pol = self.policy
        mu, cache = pol.mean.forward_cached(s)
        inv_var = np.exp(-2.0 * pol.log_std)
        diff = a - mu
        lp = np.sum(-0.5 * diff * diff * inv_var - pol.log_std - _HALF_LOG_2PI, axis=-1)
        p = np.exp(lp - log_prob_old)
        unclipped = p * A
        clipped = np.clip(p, 1 - eps, 1 + eps) * A
        obj = np.minimum(unclipped, clipped)
        # gradient flows only where the unclipped branch is selected
        coef = np.where(unclipped <= clipped, unclipped, 0.0) / len(A)  # d mean(obj) / d log pi
        d_mu = coef[:, None] * diff * inv_var
        d_log_std = np.sum(coef[:, None] * (diff * diff * inv_var - 1.0), axis=0)
        grads, _ = pol.mean.backward(cache, -d_mu)
        return float(np.mean(obj)), grads + [-d_log_std]

    def policy_step(self, s, a, log_prob_old, A) -> float:
        """One ascent step on the mean clipped surrogate; returns its pre-step value."""
        obj, grads = self.policy_gradients(s, a, log_prob_old, A)
        if self.cfg.grad_clip:
            grads, _ = clip_by_global_norm(grads, self.cfg.grad_clip)
        self.policy_opt.step(self.policy.params, grads)
        self.policy.clamp_log_std()
        return obj

    def value_gradients(self, s, y):
        """(loss, grads) of mean (V(s) - y)^2 with y held fixed."""
        v, cache = self.value.forward_cached(s)
        err = v[:, 0] - y
        grads, _ = self.value.backward(cache, (2.0 / len(y)) * err[:, None])
        return float(np.mean(err ** 2)), grads

    def value_step(self, s, y) -> float:
        loss, grads = self.value_gradients(s, y)
        if self.cfg.grad_clip:
            grads, _ = clip_by_global_norm(grads, self.cfg.grad_clip)
        self.value_opt.step(self.value.params, grads)
        return loss

    def update(self) -> dict | None:
        """Run the PPO epochs over the stored rollout, then clear it.

        Returns None (and does nothing) when the rollout is empty.
        """
        if len(self.rollout) == 0:
            return None
        cfg = self.cfg
        s, a, r, s_next, lp_old = self.rollout.arrays()
        v_next = self.value(s_next)[:, 0]
        A = advantage(r, self.value(s)[:, 0], v_next, cfg.zeta)
        y = r + cfg.zeta * v_next
        if cfg.normalize_advantages and len(A) > 1:
            A = (A - A.mean()) / (A.std() + 1e-8)
        n = len(r)
        surr, vloss = [], []
        for _ in range(cfg.epochs):
            order = self.rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                surr.append(self.policy_step(s[idx], a[idx], lp_old[idx], A[idx]))
                vloss.append(self.value_step(s[idx], y[idx]))
        self.rollout.clear()
        return {"surrogate": float(np.mean(surr)), "value_loss": float(np.mean(vloss)),
                "n": n}

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.policy.mean.save(d / "policy.mlp")
        self.value.save(d / "value.mlp")
        np.savetxt(d / "log_std.txt", self.policy.log_std, fmt="%.17g")
        self.policy_opt.save(d / "policy.adam")
        self.value_opt.save(d / "value.adam")

    def load(self, directory) -> None:
        d = Path(directory)
        self.policy.mean = Mlp.load(d / "policy.mlp")
        self.policy.log_std = np.atleast_1d(np.loadtxt(d / "log_std.txt"))
        self.value = Mlp.load(d / "value.mlp")
        self.policy_opt = Adam.load(d / "policy.adam")
        self.value_opt = Adam.load(d / "value.adam")
