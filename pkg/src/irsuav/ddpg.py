"""Deterministic-policy actor-critic with replay and soft-updated targets."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nn import Adam, Mlp, clip_by_global_norm, soft_update


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest entries are overwritten first."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.s = np.zeros((capacity, state_dim))
        self.a = np.zeros((capacity, action_dim))
        self.r = np.zeros(capacity)
        self.s_next = np.zeros((capacity, state_dim))
        self.cursor = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def store(self, t: Transition) -> None:
        i = self.cursor
        self.s[i], self.a[i], self.r[i], self.s_next[i] = t.s, t.a, t.r, t.s_next
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def ordered_indices(self) -> np.ndarray:
        """Slot indices from oldest to newest."""
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.capacity) + self.cursor) % self.capacity

    def sample_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        return rng.integers(0, self.size, size=n)

    def batch(self, idx):
        return self.s[idx], self.a[idx], self.r[idx], self.s_next[idx]

    def sample(self, n: int, rng: np.random.Generator) -> list[Transition]:
        idx = self.sample_indices(n, rng)
        return [Transition(self.s[i].copy(), self.a[i].copy(), float(self.r[i]),
                           self.s_next[i].copy()) for i in idx]


@dataclass
class DdpgConfig:
    actor_lr: float = 1e-3
    critic_lr: float = 2e-3
    zeta: float = 0.9
    kappa: float = 0.01
    batch_size: int = 32
    buffer_capacity: int = 100_000
    noise_scale: float = 3.0
    noise_decay: float = 0.99995
    hidden: tuple = (128, 128)
    grad_clip: float = 1.0


class DdpgAgent:
    def __init__(self, state_dim: int, action_dim: int, cfg: DdpgConfig | None = None,
                 rng: np.random.Generator | None = None):
        self.cfg = cfg = cfg or DdpgConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.state_dim, self.action_dim = state_dim, action_dim
        h = list(cfg.hidden)
        self.actor = Mlp([state_dim, *h, action_dim], "tanh", self.rng, final_scale=1e-3)
        self.critic = Mlp([state_dim + action_dim, *h, 1], "identity", self.rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = Adam(self.actor.params, cfg.actor_lr)
        self.critic_opt = Adam(self.critic.params, cfg.critic_lr)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, state_dim, action_dim)
        self.noise_scale = cfg.noise_scale

    def act(self, s) -> np.ndarray:
        """Greedy action mu(s)."""
        return self.actor(s)

    def act_with_noise(self, s) -> np.ndarray:
        a = self.actor(s)
        if self.noise_scale > 0:
            a = a + self.noise_scale * self.rng.standard_normal(self.action_dim)
        self.noise_scale *= self.cfg.noise_decay
        return np.clip(a, -1.0, 1.0)

    def store(self, s, a, r, s_next) -> None:
        self.buffer.store(Transition(s, a, r, s_next))

    def q(self, s, a) -> np.ndarray:
        return self.critic(np.concatenate([s, a], axis=-1))[..., 0]

    def critic_targets(self, r, s_next) -> np.ndarray:
        """y = r + zeta * Q'(s', mu'(s'))."""
        a_next = self.actor_target(s_next)
        q_next = self.critic_target(np.concatenate([s_next, a_next], axis=-1))[..., 0]
        return r + self.cfg.zeta * q_next

    def critic_loss(self, s, a, r, s_next) -> float:
        y = self.critic_targets(r, s_next)
        return float(np.mean((y - self.q(s, a)) ** 2))

    def critic_gradients(self, s, a, r, s_next):
        """(loss, grads) of the mean squared TD error against the frozen targets."""
        y = self.critic_targets(r, s_next)
        q, cache = self.critic.forward_cached(np.concatenate([s, a], axis=1))
        err = q[:, 0] - y
        grads, _ = self.critic.backward(cache, (2.0 / len(y)) * err[:, None])
        return float(np.mean(err ** 2)), grads

    def actor_gradients(self, s):
        """Gradients of -mean Q(s, mu(s)) with respect to the actor parameters."""
        mu, a_cache = self.actor.forward_cached(s)
        _, q_cache = self.critic.forward_cached(np.concatenate([s, mu], axis=1))
        _, dx = self.critic.backward(q_cache, np.full((len(s), 1), -1.0 / len(s)))
        grads, _ = self.actor.backward(a_cache, dx[:, self.state_dim:])
        return grads

    def train_step(self, batch=None) -> float | None:
        """One critic step, one actor step, one soft update.

        Returns the critic loss before the step, or None if the buffer holds
        fewer than batch_size transitions.
        """
        cfg = self.cfg
        if batch is None:
            if len(self.buffer) < cfg.batch_size:
                return None
            batch = self.buffer.batch(self.buffer.sample_indices(cfg.batch_size, self.rng))
        s, a, r, s_next = batch
        loss, grads = self.critic_gradients(s, a, r, s_next)
        grads, _ = clip_by_global_norm(grads, cfg.grad_clip)
        self.critic_opt.step(self.critic.params, grads)

        a_grads = self.actor_gradients(s)
        a_grads, _ = clip_by_global_norm(a_grads, cfg.grad_clip)
        self.actor_opt.step(self.actor.params, a_grads)

        soft_update(self.critic_target, self.critic, cfg.kappa)
        soft_update(self.actor_target, self.actor, cfg.kappa)
        return loss

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.actor.save(d / "actor.mlp")
        self.critic.save(d / "critic.mlp")
        self.actor_target.save(d / "actor_target.mlp")
        self.critic_target.save(d / "critic_target.mlp")
        self.actor_opt.save(d / "actor.adam")
        self.critic_opt.save(d / "critic.adam")
        (d / "noise_scale.txt").write_text(repr(self.noise_scale) + "\n")

    def load(self, directory) -> None:
        d = Path(directory)
        self.actor = Mlp.load(d / "actor.mlp")
        self.critic = Mlp.load(d / "critic.mlp")
        self.actor_target = Mlp.load(d / "actor_target.mlp")
        self.critic_target = Mlp.load(d / "critic_target.mlp")
        self.actor_opt = Adam.load(d / "actor.adam")
        self.critic_opt = Adam.load(d / "critic.adam")
        self.noise_scale = float((d / "noise_scale.txt").read_text())
