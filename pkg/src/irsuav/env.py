"""Episodic MDP over the IRS-assisted multi-UAV downlink.

Timing within one step: the agent sees the compound gains of the current
channel draw under the previous phase configuration, chooses powers and
phases, is rewarded on that same draw, and then the NLoS parts are redrawn to
form the next state. UE positions are resampled at reset and frozen for the
episode.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .channel import ChannelModel, ChannelParams, ChannelRealization, compound_gains
from .metrics import MetricsReport, NetworkConfig

TABLE1_UAVS = ((0.0, 0.0, 200.0), (200.0, 300.0, 200.0), (400.0, 0.0, 200.0))
TABLE1_IRS = (500.0, 500.0, 30.0)


@dataclass(frozen=True)
class EnvConfig:
    net: NetworkConfig = field(default_factory=NetworkConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    uav_positions: tuple = TABLE1_UAVS
    irs_position: tuple = TABLE1_IRS
    cluster_radius: float = 500.0
    episode_length: int = 100
    seed: int = 0

    def __post_init__(self):
        if len(self.uav_positions) != self.net.N:
            raise ValueError(
                f"{len(self.uav_positions)} UAV positions given for N={self.net.N}"
            )
        if self.net.K != self.channel.K:
            raise ValueError("network and channel element counts differ")
        if not self.cluster_radius > 0:
            raise ValueError("cluster_radius must be positive")
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")

    @property
    def state_dim(self) -> int:
        return 2 * self.net.N * self.net.M

    @property
    def action_dim(self) -> int:
        return self.net.N + self.net.K

    def with_sizes(self, **kw) -> "EnvConfig":
        """Copy with N/M/K (and other NetworkConfig fields) changed consistently."""
        net = replace(self.net, **{k: v for k, v in kw.items() if hasattr(self.net, k)})
        ch = replace(self.channel, K=net.K)
        rest = {k: v for k, v in kw.items() if not hasattr(self.net, k)}
        if "uav_positions" not in rest and net.N != len(self.uav_positions):
            if net.N > len(self.uav_positions):
                raise ValueError(f"N={net.N} needs explicit uav_positions")
            rest["uav_positions"] = tuple(self.uav_positions[: net.N])
        return replace(self, net=net, channel=ch, **rest)


@dataclass
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool
    metrics: MetricsReport
    powers: np.ndarray
    phases: np.ndarray


def map_action(raw, N: int, P_max: float):
    """Clamp raw actor output to [-1, 1] and map to (powers, phases)."""
    a = np.clip(np.asarray(raw, dtype=float), -1.0, 1.0)
    powers = (a[:N] + 1.0) * 0.5 * P_max
    phases = (a[N:] + 1.0) * np.pi
    return powers, phases


def phases_to_raw(phases) -> np.ndarray:
    return np.mod(np.asarray(phases, dtype=float), 2 * np.pi) / np.pi - 1.0


def state_features(realization: ChannelRealization, phases) -> np.ndarray:
    """Interleaved (re, im) of g_n,nm in cluster-major, UE-minor order."""
    g = compound_gains(realization, phases)
    n = np.arange(realization.N)
    own = g[n, n]  # (N, M)
    return np.stack([own.real, own.imag], axis=-1).ravel()


class IrsUavEnv:
    def __init__(self, cfg: EnvConfig, rng: np.random.Generator | None = None):
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.model = ChannelModel(cfg.uav_positions, cfg.irs_position, cfg.channel)
        self.realization: ChannelRealization | None = None
        self.phases = np.zeros(cfg.net.K)
        self.t = 0
        self.done = True
        self._initialised = False

    @property
    def state_dim(self) -> int:
        return self.cfg.state_dim

    @property
    def action_dim(self) -> int:
        return self.cfg.action_dim

    @property
    def obs_scale(self) -> float:
        """Multiplier turning raw gains into sqrt-SNR units at full power."""
        return float(np.sqrt(self.cfg.net.P_max / self.cfg.net.noise_power))

    def reset(self) -> np.ndarray:
        self.model.sample_ues(self.cfg.net.M, self.cfg.cluster_radius, self.rng)
        self.realization = self.model.draw(self.rng)
        self.phases = np.zeros(self.cfg.net.K)
        self.t = 0
        self.done = False
        self._initialised = True
        return self.observe_state()

    def set_realization(self, realization: ChannelRealization, phases=None) -> None:
        """Install a hand-made channel draw (testing and oracles)."""
        self.realization = realization
        if phases is not None:
            self.phases = np.asarray(phases, dtype=float) % (2 * np.pi)
        self._initialised = True
        self.done = False

    def observe_state(self) -> np.ndarray:
        if not self._initialised:
            raise RuntimeError("environment not reset")
        return state_features(self.realization, self.phases)

    def evaluate(self, powers, phases) -> MetricsReport:
        """Metrics of the current draw under the given configuration, no side effects."""
        return metrics.evaluate(self.cfg.net, self.realization, powers, phases)

    def step(self, raw_action) -> StepResult:
        if not self._initialised:
            raise RuntimeError("environment not reset")
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        raw = np.asarray(raw_action, dtype=float)
        if raw.shape != (self.action_dim,):
            raise ValueError(f"expected action of shape ({self.action_dim},), got {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise ValueError("action contains non-finite values")
        powers, phases = map_action(raw, self.cfg.net.N, self.cfg.net.P_max)
        report = self.evaluate(powers, phases)
        reward = report.ee / self.cfg.net.B
        self.phases = phases
        self.realization = self.model.draw(self.rng)
        self.t += 1
        self.done = self.t >= self.cfg.episode_length
        return StepResult(self.observe_state(), reward, self.done, report, powers, phases)


class TrajectoryWriter:
    """CSV dump of (episode, step, reward, per-UE SINR)."""

    def __init__(self, path, N: int, M: int):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(["episode", "step", "reward"] +
                         [f"sinr_{n}_{m}" for n in range(N) for m in range(M)])

    def write(self, episode: int, step: int, result: StepResult) -> None:
        self._w.writerow([episode, step, repr(float(result.reward))] +
                         [repr(float(x)) for x in result.metrics.sinr.ravel()])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
