"""Oracle and invariant suites run by ``irsuav check``.

Each check returns ``CheckResult(name, passed, detail)``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import metrics, oracles
from .channel import ChannelRealization, complex_normal, effective_channel
from .ddpg import DdpgAgent, DdpgConfig, ReplayBuffer, Transition
from .env import EnvConfig, IrsUavEnv
from .metrics import NetworkConfig
from .nn import Mlp, check_gradients, max_relative_error, numeric_gradients, soft_update
from .ppo import PpoAgent, PpoConfig, clipped_objective


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    diff = np.abs(a - b)
    return float(np.max(np.where(diff == 0, 0.0, diff / scale)))


def random_instance(rng, N_max=3, M_max=4, K_max=8):
    N, M, K = (int(rng.integers(1, x + 1)) for x in (N_max, M_max, K_max))
    # channel magnitudes in the physical range of the default geometry
    aa = complex_normal(rng, (N, K)) * 10 ** rng.uniform(-5.5, -4, (N, 1))
    ag = complex_normal(rng, (N, M, K)) * 10 ** rng.uniform(-5.5, -4, (N, M, 1))
    cfg = NetworkConfig(N=N, M=M, K=K)
    powers = rng.uniform(0, cfg.P_max, N)
    theta = rng.uniform(0, 2 * np.pi, K)
    return cfg, ChannelRealization(aa=aa, ag=ag), powers, theta


def metric_oracle(instances=1000, seed=0, tol=1e-9) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(instances):
        cfg, real, p, th = random_instance(rng)
        rep = metrics.evaluate(cfg, real, p, th)
        ref = oracles.network_metrics(real.aa.tolist(), real.ag.tolist(), p.tolist(),
                                      th.tolist(), cfg.B, cfg.P_fixed, cfg.noise_power)
        worst = max(worst, _rel(rep.sinr, ref["sinr"]), _rel(rep.rate, ref["rate"]),
                    _rel(rep.total_rate, ref["total_rate"]),
                    _rel(rep.total_power, ref["total_power"]), _rel(rep.ee, ref["ee"]))
    dt = time.perf_counter() - t0
    return CheckResult("metric oracle equivalence", worst <= tol,
                       f"{instances} instances, max rel err {worst:.2e} (tol {tol:g}), {dt:.1f}s")


def network_shapes(state_dim=6, action_dim=3, hidden=(8, 16, 8)):
    """(name, sizes, output) of the four network roles at test scale."""
    h = list(hidden)
    return [
        ("actor", [state_dim, *h, action_dim], "tanh"),
        ("critic", [state_dim + action_dim, *h, 1], "identity"),
        ("value", [state_dim, *h, 1], "identity"),
        ("policy", [state_dim, *h, action_dim], "tanh"),
    ]


def _loss_gradient_errors(rng, sd=6, ad=3, hidden=(8, 16, 8), n=4) -> dict:
    """Relative error of each training-loss gradient against central differences."""
    s, s2 = rng.normal(size=(n, sd)), rng.normal(size=(n, sd))
    a, r = rng.uniform(-1, 1, (n, ad)), rng.normal(size=n)
    ddpg = DdpgAgent(sd, ad, DdpgConfig(hidden=hidden), rng)
    ppo = PpoAgent(sd, ad, PpoConfig(hidden=hidden), rng)
    ppo.policy.log_std += rng.normal(scale=0.2, size=ad)
    errs = {}

    _, g = ddpg.critic_gradients(s, a, r, s2)
    y = ddpg.critic_targets(r, s2)
    num = numeric_gradients(lambda: float(np.mean((y - ddpg.q(s, a)) ** 2)), ddpg.critic.params)
    errs["critic"] = max_relative_error(g, num)

    g = ddpg.actor_gradients(s)
    num = numeric_gradients(lambda: -float(np.mean(ddpg.q(s, ddpg.actor(s)))), ddpg.actor.params)
    errs["actor"] = max_relative_error(g, num)

    _, g = ppo.value_gradients(s, r)
    num = numeric_gradients(lambda: float(np.mean((ppo.value(s)[:, 0] - r) ** 2)),
                            ppo.value.params)
    errs["value"] = max_relative_error(g, num)

    lp_old = ppo.policy.log_prob(s, a) + rng.normal(scale=0.05, size=n)
    A = rng.normal(size=n)
    _, g = ppo.policy_gradients(s, a, lp_old, A)
    num = numeric_gradients(lambda: -ppo.surrogate(s, a, lp_old, A), ppo.policy.params)
    errs["policy"] = max_relative_error(g, num)
    return errs


def gradient_check(trials=3, seed=0, tol=1e-4) -> CheckResult:
    """Backprop of each network role, then each agent's training-loss gradient."""
    rng = np.random.default_rng(seed)
    worst = {}
    t0 = time.perf_counter()
    for _ in range(trials):
        for name, sizes, out in network_shapes():
            net = Mlp(sizes, out, rng)
            x = rng.normal(size=(4, sizes[0]))
            seed_vec = rng.normal(size=(4, sizes[-1]))
            worst[name] = max(worst.get(name, 0.0), check_gradients(net, x, seed_vec))
        for name, e in _loss_gradient_errors(rng).items():
            worst[name + " loss"] = max(worst.get(name + " loss", 0.0), e)
    dt = time.perf_counter() - t0
    top = max(worst.values())
    parts = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return CheckResult("gradient correctness", top < tol,
                       f"max rel err {top:.2e} (tol {tol:g}; {parts}), {dt:.1f}s")


def alignment_bound(trials=200, seed=1) -> CheckResult:
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(trials):
        K = int(rng.integers(1, 16))
        H, h = complex_normal(rng, K), complex_normal(rng, K)
        bound = float(np.sum(np.abs(H) * np.abs(h)))
        rand = abs(effective_channel(H, rng.uniform(0, 2 * np.pi, K), h))
        aligned = abs(effective_channel(H, -(np.angle(H) + np.angle(h)), h))
        ok &= rand <= bound * (1 + 1e-12) and abs(aligned - bound) <= 1e-12 * bound
    return CheckResult("coherent-alignment bound", bool(ok), f"{trials} random instances")


def clip_branch_agreement(trials=10_000, seed=2) -> CheckResult:
    rng = np.random.default_rng(seed)
    p = rng.uniform(0, 3, trials)
    A = rng.normal(size=trials)
    eps = rng.uniform(0.01, 0.5, trials)
    got = clipped_objective(p, A, eps)
    ref = np.array([oracles.clipped_objective_cases(*t) for t in zip(p, A, eps)])
    mism = int(np.sum(got != ref))
    return CheckResult("clip-branch agreement", mism == 0, f"{mism} mismatches in {trials}")


def replay_eviction(seed=3) -> CheckResult:
    buf = ReplayBuffer(5, 1, 1)
    for i in range(12):
        buf.store(Transition(np.array([i]), np.array([0.0]), float(i), np.array([i + 1])))
    kept = buf.r[buf.ordered_indices()].tolist()
    return CheckResult("replay eviction", kept == [7.0, 8.0, 9.0, 10.0, 11.0], f"kept {kept}")


def soft_update_algebra(seed=4) -> CheckResult:
    rng = np.random.default_rng(seed)
    ok = True
    for kappa in (0.0, 0.01, 0.5, 1.0):
        online = Mlp([3, 4, 2], "identity", rng)
        target = Mlp([3, 4, 2], "identity", rng)
        before = [p.copy() for p in target.params]
        soft_update(target, online, kappa)
        for b, t, o in zip(before, target.params, online.params):
            ok &= np.allclose(np.abs(t - o), (1 - kappa) * np.abs(b - o), rtol=1e-12, atol=1e-15)
    return CheckResult("soft-update algebra", bool(ok), "kappa in {0, 0.01, 0.5, 1}")


def state_information_hiding(seed=5) -> CheckResult:
    """Change UAV 1's channel invisibly to the state; the reward must still move.

    The perturbation lies in the null space of cluster 1's own compound gains,
    so every feature is unchanged while interference at clusters 0 and 2 is not.
    """
    cfg = EnvConfig().with_sizes(N=3, M=2, K=6, episode_length=5)
    env = IrsUavEnv(cfg, np.random.default_rng(seed))
    env.reset()
    env.set_realization(env.realization, phases=np.random.default_rng(seed).uniform(0, 6, 6))
    real = env.realization
    powers = np.full(3, 2.0)
    s0, r0 = env.observe_state(), env.evaluate(powers, env.phases).ee
    A = np.exp(1j * env.phases)[None, :] * real.ag[1]  # (M, K)
    _, _, vh = np.linalg.svd(A)
    null = vh[cfg.net.M:].conj().T  # K x (K - M), A @ null == 0
    v = null @ complex_normal(np.random.default_rng(seed + 1), null.shape[1])
    aa = real.aa.copy()
    aa[1] = aa[1] + 0.5 * np.abs(aa[1]).max() * v / np.linalg.norm(v)
    env.set_realization(ChannelRealization(aa=aa, ag=real.ag))
    s1, r1 = env.observe_state(), env.evaluate(powers, env.phases).ee
    state_err = float(np.max(np.abs(s1 - s0)) / np.max(np.abs(s0)))
    reward_change = abs(r1 - r0) / r0
    ok = state_err < 1e-9 and reward_change > 1e-6
    return CheckResult("state information hiding", ok,
                       f"state rel change {state_err:.1e}, reward rel change {reward_change:.1e}")


def determinism(seed=6) -> CheckResult:
    from .training import run_scheme

    cfg = EnvConfig().with_sizes(N=1, M=2, K=4, episode_length=10)
    a = run_scheme("c-ddpg", cfg, 3, seed).trace.rewards
    b = run_scheme("c-ddpg", cfg, 3, seed).trace.rewards
    c = run_scheme("p-ppo", cfg, 3, seed).trace.rewards
    d = run_scheme("p-ppo", cfg, 3, seed).trace.rewards
    return CheckResult("determinism under seed", a == b and c == d, "c-ddpg and p-ppo traces")


INVARIANT_SUITE = (alignment_bound, clip_branch_agreement, replay_eviction, soft_update_algebra,
                   state_information_hiding, determinism)


def run_all() -> list[CheckResult]:
    return [metric_oracle(), gradient_check()] + [f() for f in INVARIANT_SUITE]
