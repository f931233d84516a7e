"""Run configuration: a line-oriented ``key = value`` text format.

Grammar::

    file   := { line }
    line   := blank | "#" comment | key "=" value [ "#" comment ]
    value  := number | word | point | points | list
    point  := x "," y "," z
    points := point { ";" point }
    list   := item { "," item }

Keys (defaults from the reference simulation table; dB/dBm values are stored
as written and converted once at load):

    N, M, K                      UAVs, UEs per cluster, IRS elements   3, 10, 10
    bandwidth_hz                                                       1e6
    p_max_w, p_fixed_w           max transmit power, IRS + circuit     5, 4
    noise_dbm                                                          -134
    beta0_db                     reference channel gain                -30
    kappa1, kappa2               path-loss exponents                   2, 2.2
    beta1                        Rician factor (linear)                4
    d_over_lambda                                                      0.5
    irs                          IRS position                          500,500,30
    uavs                         UAV positions (first N of the table   0,0,200; 200,300,200;
                                 are used when omitted)                400,0,200
    coverage_m                   UE disc radius per cluster            500
    episode_length                                                     100
    scheme                       c-ddpg|p-ddpg|c-ppo|p-ppo|mpt|rss     c-ddpg
    episodes, seeds, jobs, out                                         1000, 0, 1, runs
    zeta, batch_size             shared by both learners               0.9, 32
    actor_lr, critic_lr, kappa, noise_scale, noise_decay, buffer_capacity, grad_clip
    policy_lr, value_lr, epsilon, horizon, epochs, init_std
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .channel import ChannelParams, db_to_linear, dbm_to_watts
from .ddpg import DdpgConfig
from .env import TABLE1_IRS, TABLE1_UAVS, EnvConfig
from .metrics import NetworkConfig
from .ppo import PpoConfig
from .training import Scheme


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "N": 3, "M": 10, "K": 10,
    "bandwidth_hz": 1e6, "p_max_w": 5.0, "p_fixed_w": 4.0, "noise_dbm": -134.0,
    "beta0_db": -30.0, "kappa1": 2.0, "kappa2": 2.2, "beta1": 4.0, "d_over_lambda": 0.5,
    "irs": TABLE1_IRS, "uavs": None, "coverage_m": 500.0, "episode_length": 100,
    "scheme": "c-ddpg", "episodes": 1000, "seeds": (0,), "jobs": 1, "out": "runs",
    "zeta": 0.9, "batch_size": 32,
    "actor_lr": 1e-3, "critic_lr": 2e-3, "kappa": 0.01, "noise_scale": 3.0,
    "noise_decay": 0.99995, "buffer_capacity": 100_000, "grad_clip": 1.0,
    "policy_lr": 1e-5, "value_lr": 1e-4, "epsilon": 0.2, "horizon": 2048, "epochs": 10,
    "init_std": 0.5,
}
# canonical serialization order
KEYS = tuple(DEFAULTS)
_INT_KEYS = {"N", "M", "K", "episode_length", "episodes", "jobs", "batch_size",
             "buffer_capacity", "horizon", "epochs"}
_STR_KEYS = {"scheme", "out"}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))

    def __getitem__(self, key):
        return self.values[key]

    @property
    def scheme(self) -> Scheme:
        return Scheme(self.values["scheme"])

    @property
    def seeds(self) -> tuple:
        return tuple(self.values["seeds"])

    @property
    def episodes(self) -> int:
        return self.values["episodes"]

    @property
    def out(self) -> Path:
        return Path(self.values["out"])

    @property
    def uav_positions(self) -> tuple:
        v = self.values
        if v["uavs"] is not None:
            return tuple(v["uavs"])
        return TABLE1_UAVS[: v["N"]]

    def env_config(self, seed: int = 0) -> EnvConfig:
        v = self.values
        net = NetworkConfig(N=v["N"], M=v["M"], K=v["K"], B=v["bandwidth_hz"],
                            P_max=v["p_max_w"], P_fixed=v["p_fixed_w"],
                            noise_power=dbm_to_watts(v["noise_dbm"]))
        ch = ChannelParams(beta0=db_to_linear(v["beta0_db"]), kappa1=v["kappa1"],
                           kappa2=v["kappa2"], beta1=v["beta1"],
                           d_over_lambda=v["d_over_lambda"], K=v["K"])
        return EnvConfig(net=net, channel=ch, uav_positions=self.uav_positions,
                         irs_position=tuple(v["irs"]), cluster_radius=v["coverage_m"],
                         episode_length=v["episode_length"], seed=seed)

    def ddpg_config(self) -> DdpgConfig:
        v = self.values
        return DdpgConfig(actor_lr=v["actor_lr"], critic_lr=v["critic_lr"], zeta=v["zeta"],
                          kappa=v["kappa"], batch_size=v["batch_size"],
                          buffer_capacity=v["buffer_capacity"], noise_scale=v["noise_scale"],
                          noise_decay=v["noise_decay"], grad_clip=v["grad_clip"])

    def ppo_config(self) -> PpoConfig:
        v = self.values
        return PpoConfig(policy_lr=v["policy_lr"], value_lr=v["value_lr"], zeta=v["zeta"],
                         epsilon=v["epsilon"], horizon=v["horizon"], epochs=v["epochs"],
                         batch_size=v["batch_size"], init_log_std=math.log(v["init_std"]))

    def with_overrides(self, **kw) -> "RunConfig":
        new = RunConfig(dict(self.values))
        for k, val in kw.items():
            if k not in DEFAULTS:
                raise ConfigError(f"unknown key {k!r}")
            new.values[k] = _coerce(k, val) if isinstance(val, str) else val
        validate(new)
        return new


def _point(text: str) -> tuple:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected x,y,z but got {text!r}")
    return tuple(parts)


def _coerce(key: str, text: str):
    text = text.strip()
    try:
        if key == "irs":
            return _point(text)
        if key == "uavs":
            return tuple(_point(p) for p in text.split(";") if p.strip())
        if key == "seeds":
            return tuple(int(s) for s in text.split(",") if s.strip())
        if key in _STR_KEYS:
            return text
        if key in _INT_KEYS:
            f = float(text)
            if f != int(f):
                raise ConfigError(f"{key} must be an integer, got {text!r}")
            return int(f)
        return float(text)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_config(text: str) -> RunConfig:
    values = dict(DEFAULTS)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        values[key] = _coerce(key, val)
    cfg = RunConfig(values)
    validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def _fmt(key, val) -> str:
    if key == "irs":
        return ",".join(repr(float(x)) for x in val)
    if key == "uavs":
        return "; ".join(",".join(repr(float(x)) for x in p) for p in val)
    if key == "seeds":
        return ",".join(str(int(s)) for s in val)
    if isinstance(val, float):
        return repr(val)
    return str(val)


def serialize(cfg: RunConfig) -> str:
    lines = []
    for key in KEYS:
        val = cfg.values[key]
        if val is None:
            continue
        lines.append(f"{key} = {_fmt(key, val)}")
    return "\n".join(lines) + "\n"


def validate(cfg: RunConfig) -> None:
    v = cfg.values
    for k in ("N", "M", "K", "episode_length", "episodes", "jobs", "batch_size",
              "buffer_capacity", "horizon", "epochs"):
        if v[k] < 1:
            raise ConfigError(f"{k} must be >= 1, got {v[k]}")
    for k in ("bandwidth_hz", "p_max_w", "p_fixed_w", "coverage_m", "d_over_lambda",
              "kappa1", "kappa2", "init_std"):
        if not v[k] > 0:
            raise ConfigError(f"{k} must be positive, got {v[k]}")
    if v["beta1"] < 0:
        raise ConfigError("beta1 must be non-negative")
    if not 0 <= v["kappa"] <= 1:
        raise ConfigError("kappa must lie in [0, 1]")
    if not 0 <= v["zeta"] <= 1:
        raise ConfigError("zeta must lie in [0, 1]")
    if not v["seeds"]:
        raise ConfigError("at least one seed is required")
    try:
        Scheme(v["scheme"])
    except ValueError:
        raise ConfigError(f"unknown scheme {v['scheme']!r}") from None
    uavs = cfg.uav_positions
    if len(uavs) != v["N"]:
        raise ConfigError(f"{len(uavs)} UAV positions for N={v['N']}; set 'uavs' explicitly")
    for p in list(uavs) + [v["irs"]]:
        if len(p) != 3 or not all(math.isfinite(x) for x in p) or p[2] < 0:
            raise ConfigError(f"bad position {p}")
    for u in uavs:
        if tuple(u) == tuple(v["irs"]):
            raise ConfigError("a UAV coincides with the IRS")


PRESETS = {
    "table1": "",
    "smoke": "N = 1\nM = 2\nK = 4\nepisodes = 5\nepisode_length = 10\n",
    "fig3": "M = 10\nK = 20\nepisodes = 1000\n",
    "tiny": "N = 1\nM = 1\nK = 2\nepisode_length = 50\nepisodes = 300\nseeds = 0,1,2\n",
    "desk": "N = 3\nM = 4\nK = 10\nepisode_length = 50\nepisodes = 600\nseeds = 0,1,2\n",
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return parse_config(PRESETS[name])
