"""SINR, throughput, power and energy efficiency of the downlink."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, compound_gains, dbm_to_watts


@dataclass(frozen=True)
class NetworkConfig:
    N: int = 3
    M: int = 10
    K: int = 10
    B: float = 1e6
    P_max: float = 5.0
    P_fixed: float = 4.0
    noise_power: float = dbm_to_watts(-134.0)

    def __post_init__(self):
        for name in ("N", "M", "K"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        for name in ("B", "P_max", "P_fixed", "noise_power"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class MetricsReport:
    sinr: np.ndarray  # (N, M)
    rate: np.ndarray  # (N, M), bits/s
    total_rate: float
    total_power: float
    ee: float  # bits/s/W

    CSV_COLUMNS = ("step", "total_rate", "total_power", "ee", "ee_per_hz")

    def ee_per_hz(self, B: float) -> float:
        return self.ee / B

    def csv_row(self, step: int, B: float) -> list:
        return [step, repr(self.total_rate), repr(self.total_power), repr(self.ee),
                repr(self.ee / B)] + [repr(float(x)) for x in self.sinr.ravel()]

    @staticmethod
    def csv_header(N: int, M: int) -> list[str]:
        return list(MetricsReport.CSV_COLUMNS) + [
            f"sinr_{n}_{m}" for n in range(N) for m in range(M)
        ]


def check_powers(cfg: NetworkConfig, powers) -> np.ndarray:
    p = np.asarray(powers, dtype=float)
    if p.shape != (cfg.N,):
        raise ValueError(f"expected {cfg.N} powers, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > cfg.P_max * (1 + 1e-12)):
        raise ValueError(f"powers must lie in [0, {cfg.P_max}]")
    return p


def sinr_matrix(cfg: NetworkConfig, realization: ChannelRealization, powers, phases) -> np.ndarray:
    """SINR of every UE, shape (N, M).

    The interference from UAV i at UE (n, m) travels over H_i and the victim's
    own IRS->UE channel h_nm.
    """
    p = check_powers(cfg, powers)
    g2 = np.abs(compound_gains(realization, phases)) ** 2  # (i, n, m)
    rx = p[:, None, None] * g2
    n = np.arange(cfg.N)
    signal = rx[n, n]  # (N, M)
    interference = np.where(np.eye(cfg.N, dtype=bool)[:, :, None], 0.0, rx).sum(axis=0)
    return signal / (interference + cfg.noise_power)


def sinr(cfg, realization, powers, phases, n: int, m: int) -> float:
    if not (0 <= n < cfg.N and 0 <= m < cfg.M):
        raise IndexError(f"UE index ({n}, {m}) out of range for N={cfg.N}, M={cfg.M}")
    return float(sinr_matrix(cfg, realization, powers, phases)[n, m])


def rate(cfg: NetworkConfig, sinr_value) -> float | np.ndarray:
    s = np.asarray(sinr_value, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be non-negative")
    r = cfg.B * np.log2(1.0 + s)
    return float(r) if r.ndim == 0 else r


def _sum_ordered(values: np.ndarray) -> float:
    # cluster-major, UE-minor, strictly left to right
    total = 0.0
    for v in values.ravel():
        total += float(v)
    return total


def total_rate(cfg, realization, powers, phases) -> float:
    return _sum_ordered(rate(cfg, sinr_matrix(cfg, realization, powers, phases)))


def total_power(cfg: NetworkConfig, powers) -> float:
    p = check_powers(cfg, powers)
    return _sum_ordered(p) + cfg.P_fixed


def energy_efficiency(cfg, realization, powers, phases) -> float:
    tp = total_power(cfg, powers)
    if tp <= 0:
        raise ValueError("total power is zero; energy efficiency undefined")
    return total_rate(cfg, realization, powers, phases) / tp


def evaluate(cfg: NetworkConfig, realization, powers, phases) -> MetricsReport:
    s = sinr_matrix(cfg, realization, powers, phases)
    r = rate(cfg, s)
    tr = _sum_ordered(r)
    tp = total_power(cfg, powers)
    if tp <= 0:
        raise ValueError("total power is zero; energy efficiency undefined")
    return MetricsReport(sinr=s, rate=r, total_rate=tr, total_power=tp, ee=tr / tp)


def reports_to_csv(reports, B: float) -> str:
    reports = list(reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if reports:
        N, M = reports[0].sinr.shape
        w.writerow(MetricsReport.csv_header(N, M))
    for t, rep in enumerate(reports):
        w.writerow(rep.csv_row(t, B))
    return buf.getvalue()
