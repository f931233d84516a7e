"""Runners for the six schemes: c-ddpg, p-ddpg, c-ppo, p-ppo, mpt, rss.

Every runner returns a :class:`Trace` (one mean step reward per episode) and a
greedy policy ``policy(state) -> raw action`` for post-training evaluation.
Agents see states scaled by ``env.obs_scale`` (sqrt-SNR units); the raw state
is what the environment returns.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .ddpg import DdpgAgent, DdpgConfig
from .env import EnvConfig, IrsUavEnv, phases_to_raw
from .ppo import PpoAgent, PpoConfig


class Scheme(str, Enum):
    C_DDPG = "c-ddpg"
    P_DDPG = "p-ddpg"
    C_PPO = "c-ppo"
    P_PPO = "p-ppo"
    MPT = "mpt"
    RSS = "rss"


TRACE_COLUMNS = ("episode", "scheme", "seed", "mean_reward", "noise_scale")


@dataclass
class Trace:
    scheme: str
    seed: int
    rewards: list = field(default_factory=list)
    noise: list = field(default_factory=list)

    def final_mean(self, last: int = 100) -> float:
        return float(np.mean(self.rewards[-last:]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for i, (r, nz) in enumerate(zip(self.rewards, self.noise)):
                w.writerow([i, self.scheme, self.seed, repr(float(r)), repr(float(nz))])
            w.writerow(["summary", self.scheme, self.seed, repr(self.final_mean()),
                        repr(float(self.noise[-1])) if self.noise else ""])

    @classmethod
    def read_csv(cls, path) -> "Trace":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        body = [r for r in rows if r["episode"] != "summary"]
        t = cls(scheme=rows[0]["scheme"], seed=int(rows[0]["seed"]))
        t.rewards = [float(r["mean_reward"]) for r in body]
        t.noise = [float(r["noise_scale"]) for r in body]
        return t


@dataclass
class RunResult:
    trace: Trace
    policy: Callable[[np.ndarray], np.ndarray]
    agents: list


def _rngs(seed: int, n: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _episode_loop(env: IrsUavEnv, episodes: int, act, learn, noise, trace: Trace, on_step=None):
    scale = env.obs_scale
    for ep in range(episodes):
        s = env.reset() * scale
        total, steps = 0.0, 0
        done = False
        while not done:
            a_env, memo = act(s)
            res = env.step(a_env)
            s_next = res.next_state * scale
            learn(s, memo, res.reward, s_next)
            if on_step is not None:
                on_step(ep, steps, res)
            total += res.reward
            steps += 1
            s, done = s_next, res.done
        trace.rewards.append(total / steps)
        trace.noise.append(noise())
    return trace


def run_centralised(scheme, env: IrsUavEnv, episodes: int, seed: int = 0,
                    ddpg_cfg: DdpgConfig | None = None, ppo_cfg: PpoConfig | None = None,
                    on_step=None) -> RunResult:
    scheme = Scheme(scheme)
    sd, ad = env.state_dim, env.action_dim
    (rng,) = _rngs(seed, 1)
    trace = Trace(scheme.value, seed)
    if scheme is Scheme.C_DDPG:
        agent = DdpgAgent(sd, ad, ddpg_cfg, rng)

        def act(s):
            a = agent.act_with_noise(s)
            return a, a

        def learn(s, a, r, s2):
            agent.store(s, a, r, s2)
            agent.train_step()

        _episode_loop(env, episodes, act, learn, lambda: agent.noise_scale, trace, on_step)
        return RunResult(trace, agent.act, [agent])
    if scheme is Scheme.C_PPO:
        agent = PpoAgent(sd, ad, ppo_cfg, rng)
        _run_ppo_team(env, episodes, [agent], lambda parts: np.concatenate(parts),
                      trace, on_step)
        return RunResult(trace, agent.act_greedy, [agent])
    raise ValueError(f"{scheme.value} is not a centralised scheme")


def compose_team_action(power_actions, irs_action) -> np.ndarray:
    """Concatenate per-UAV power actions and the IRS phase vector."""
    return np.concatenate([np.ravel(a) for a in power_actions] + [np.ravel(irs_action)])


def _run_ppo_team(env, episodes, agents, compose, trace, on_step=None):
    def act(s):
        outs = [ag.act(s) for ag in agents]
        return compose([o[0] for o in outs]), outs

    def learn(s, outs, r, s2):
        for ag, (_, lp, raw) in zip(agents, outs):
            ag.store(s, raw, r, s2, lp)
            if ag.ready():
                ag.update()

    def noise():
        return float(np.mean(np.concatenate([np.exp(a.policy.log_std) for a in agents])))

    return _episode_loop(env, episodes, act, learn, noise, trace, on_step)


def run_parallel(scheme, env: IrsUavEnv, episodes: int, seed: int = 0,
                 ddpg_cfg: DdpgConfig | None = None, ppo_cfg: PpoConfig | None = None,
                 on_step=None) -> RunResult:
    """N single-output power agents plus one K-output IRS agent, shared reward."""
    scheme = Scheme(scheme)
    N, K = env.cfg.net.N, env.cfg.net.K
    if N < 1:
        raise ValueError("a parallel team needs at least one UAV")
    sd = env.state_dim
    rngs = _rngs(seed, N + 1)
    dims = [1] * N + [K]
    trace = Trace(scheme.value, seed)

    def compose(parts):
        return compose_team_action(parts[:N], parts[N])

    if scheme is Scheme.P_DDPG:
        agents = [DdpgAgent(sd, d, ddpg_cfg, r) for d, r in zip(dims, rngs)]

        def act(s):
            parts = [ag.act_with_noise(s) for ag in agents]
            return compose(parts), parts

        def learn(s, parts, r, s2):
            for ag, a in zip(agents, parts):
                ag.store(s, a, r, s2)
                ag.train_step()

        noise = lambda: float(np.mean([ag.noise_scale for ag in agents]))  # noqa: E731
        _episode_loop(env, episodes, act, learn, noise, trace, on_step)
        return RunResult(trace, lambda s: compose([ag.act(s) for ag in agents]), agents)
    if scheme is Scheme.P_PPO:
        agents = [PpoAgent(sd, d, ppo_cfg, r) for d, r in zip(dims, rngs)]
        _run_ppo_team(env, episodes, agents, compose, trace, on_step)
        return RunResult(trace, lambda s: compose([ag.act_greedy(s) for ag in agents]), agents)
    raise ValueError(f"{scheme.value} is not a parallel scheme")


def run_mpt(env: IrsUavEnv, episodes: int, seed: int = 0, ppo_cfg: PpoConfig | None = None,
            on_step=None) -> RunResult:
    """Powers pinned at P_max; a PPO agent drives the K phases."""
    N, K = env.cfg.net.N, env.cfg.net.K
    (rng,) = _rngs(seed, 1)
    agent = PpoAgent(env.state_dim, K, ppo_cfg, rng)
    full = np.ones(N)
    trace = Trace(Scheme.MPT.value, seed)
    _run_ppo_team(env, episodes, [agent], lambda parts: np.concatenate([full, parts[0]]),
                  trace, on_step)
    return RunResult(trace, lambda s: np.concatenate([full, agent.act_greedy(s)]), [agent])


def run_rss(env: IrsUavEnv, episodes: int, seed: int = 0, ppo_cfg: PpoConfig | None = None,
            on_step=None) -> RunResult:
    """Uniformly random phases every step; a PPO agent drives the N powers."""
    N, K = env.cfg.net.N, env.cfg.net.K
    rng, phase_rng = _rngs(seed, 2)
    agent = PpoAgent(env.state_dim, N, ppo_cfg, rng)
    trace = Trace(Scheme.RSS.value, seed)

    def compose(parts):
        return np.concatenate([parts[0], phases_to_raw(phase_rng.uniform(0, 2 * np.pi, K))])

    _run_ppo_team(env, episodes, [agent], compose, trace, on_step)
    return RunResult(trace, lambda s: compose([agent.act_greedy(s)]), [agent])


def run_scheme(scheme, env_cfg: EnvConfig, episodes: int, seed: int,
               ddpg_cfg: DdpgConfig | None = None, ppo_cfg: PpoConfig | None = None,
               on_step=None) -> RunResult:
    """Build a fresh environment seeded from ``seed`` and run ``scheme`` on it."""
    scheme = Scheme(scheme)
    # distinct entropy from the agent streams spawned off ``seed``
    env = IrsUavEnv(env_cfg, np.random.default_rng([seed, 0xE1]))
    if scheme in (Scheme.C_DDPG, Scheme.C_PPO):
        return run_centralised(scheme, env, episodes, seed, ddpg_cfg, ppo_cfg, on_step)
    if scheme in (Scheme.P_DDPG, Scheme.P_PPO):
        return run_parallel(scheme, env, episodes, seed, ddpg_cfg, ppo_cfg, on_step)
    if scheme is Scheme.MPT:
        return run_mpt(env, episodes, seed, ppo_cfg, on_step)
    return run_rss(env, episodes, seed, ppo_cfg, on_step)


def evaluate_policy(policy, env: IrsUavEnv, episodes: int, oracle=None):
    """Run ``policy`` without learning; returns per-step rewards (and oracle values).

    ``oracle(env) -> float`` is evaluated on each step's channel draw before
    the step executes, so both see the same realization.
    """
    scale = env.obs_scale
    rewards, best = [], []
    for _ in range(episodes):
        s = env.reset() * scale
        done = False
        while not done:
            if oracle is not None:
                best.append(oracle(env))
            res = env.step(policy(s))
            rewards.append(res.reward)
            s, done = res.next_state * scale, res.done
    return np.array(rewards), np.array(best)


def episodes_to_fraction(rewards, fraction: float = 0.9, window: int = 25, last: int = 100) -> int:
    """First episode whose moving average reaches ``fraction`` of the final mean."""
    from .plotdata import moving_average

    r = np.asarray(rewards, dtype=float)
    target = fraction * float(np.mean(r[-last:]))
    smooth = moving_average(r, window)
    hits = np.nonzero(smooth >= target)[0]
    if not hits.size:
        return len(r)
    # smoothed value i covers episodes i .. i + window - 1
    return int(hits[0]) + min(window, len(r)) - 1


def save_agents(result: RunResult, directory) -> None:
    for i, ag in enumerate(result.agents):
        ag.save(Path(directory) / f"agent{i}")
