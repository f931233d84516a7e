"""Geometry and channel generation for the UAV -> IRS -> UE links.

The IRS is modelled as a uniform linear array along the global x-axis. All
elements share one position for path-loss purposes; only the steering phase
progression uses the element spacing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Large-scale channel constants (all linear scale)."""

    beta0: float = 1e-3
    kappa1: float = 2.0
    kappa2: float = 2.2
    beta1: float = 4.0
    d_over_lambda: float = 0.5
    K: int = 10

    def __post_init__(self):
        if self.beta0 <= 0:
            raise ValueError("beta0 must be positive")
        if self.kappa1 <= 0 or self.kappa2 <= 0:
            raise ValueError("path-loss exponents must be positive")
        if self.beta1 < 0:
            raise ValueError("Rician factor must be non-negative")
        if self.d_over_lambda <= 0:
            raise ValueError("d_over_lambda must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")


@dataclass
class ChannelRealization:
    """One draw of every channel in the network.

    aa: (N, K) UAV->IRS channels. ag: (N, M, K) IRS->UE channels, ag[n, m] is
    the channel to UE m of cluster n.
    """

    aa: np.ndarray
    ag: np.ndarray

    @property
    def N(self) -> int:
        return self.aa.shape[0]

    @property
    def M(self) -> int:
        return self.ag.shape[1]

    @property
    def K(self) -> int:
        return self.aa.shape[1]


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3D point, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point coordinates must be finite")
    return a


def distance(a, b) -> float:
    return float(np.linalg.norm(as_point(a) - as_point(b)))


def _nonzero_distance(a, b) -> float:
    d = distance(a, b)
    if d == 0.0:
        raise ValueError("coincident nodes: path loss is singular at zero distance")
    return d


def aoa_cosine(uav, irs) -> float:
    """Cosine of the arrival angle at the IRS array axis (x-axis)."""
    d = _nonzero_distance(uav, irs)
    return float((as_point(uav)[0] - as_point(irs)[0]) / d)


def aod_cosine(irs, ue) -> float:
    d = _nonzero_distance(irs, ue)
    return float((as_point(ue)[0] - as_point(irs)[0]) / d)


def steering_vector(cos_angle: float, K: int, d_over_lambda: float = 0.5) -> np.ndarray:
    if abs(cos_angle) > 1.0 + 1e-12:
        raise ValueError(f"|cos_angle| must be <= 1, got {cos_angle}")
    k = np.arange(int(K))
    out = np.exp(-1j * 2.0 * np.pi * d_over_lambda * k * cos_angle)
    out[0] = 1.0 + 0.0j
    return out


def aa_channel(uav, irs, p: ChannelParams) -> np.ndarray:
    """Pure line-of-sight UAV->IRS channel."""
    d = _nonzero_distance(uav, irs)
    gain = np.sqrt(p.beta0 * d ** (-p.kappa1))
    return gain * steering_vector(aoa_cosine(uav, irs), p.K, p.d_over_lambda)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: real and imaginary parts each N(0, 1/2)."""
    z = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def ag_los_part(irs, ue, p: ChannelParams) -> np.ndarray:
    """Scaled deterministic component sqrt(b0 d^-k2) sqrt(b1/(1+b1)) h_LoS."""
    d = _nonzero_distance(irs, ue)
    gain = np.sqrt(p.beta0 * d ** (-p.kappa2))
    los = steering_vector(aod_cosine(irs, ue), p.K, p.d_over_lambda)
    return gain * np.sqrt(p.beta1 / (1.0 + p.beta1)) * los


def ag_channel(irs, ue, p: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Rician IRS->UE channel with a fresh NLoS draw."""
    d = _nonzero_distance(irs, ue)
    gain = np.sqrt(p.beta0 * d ** (-p.kappa2))
    nlos = complex_normal(rng, p.K)
    return ag_los_part(irs, ue, p) + gain * np.sqrt(1.0 / (1.0 + p.beta1)) * nlos


def effective_channel(H, phases, h) -> complex:
    """sum_k H_k exp(j theta_k) h_k, the scalar H diag(exp(j theta)) h."""
    H = np.asarray(H)
    h = np.asarray(h)
    phases = np.asarray(phases, dtype=float)
    if not (H.shape == h.shape == phases.shape) or H.ndim != 1:
        raise ValueError(
            f"length mismatch: H {H.shape}, phases {phases.shape}, h {h.shape}"
        )
    return complex(np.sum(H * np.exp(1j * phases) * h))


def compound_gains(realization: ChannelRealization, phases) -> np.ndarray:
    """All reflected gains g[i, n, m] = H_i Phi h_nm, shape (N, N, M).

    Index i is the transmitting UAV, (n, m) the receiving UE.
    """
    phi = np.exp(1j * np.asarray(phases, dtype=float))
    if phi.shape != (realization.K,):
        raise ValueError(f"expected {realization.K} phases, got {phi.shape}")
    return np.einsum("ik,nmk->inm", realization.aa * phi, realization.ag)


class ChannelModel:
    """Fixed network geometry with a per-episode UE layout.

    The LoS parts are computed once per layout; ``draw`` adds fresh NLoS terms.
    """

    def __init__(self, uav_positions, irs_position, params: ChannelParams):
        self.uavs = np.array([as_point(u) for u in uav_positions])
        self.irs = as_point(irs_position)
        self.params = params
        self.aa = np.array([aa_channel(u, self.irs, params) for u in self.uavs])
        self.ues: np.ndarray | None = None
        self._ag_los = None
        self._ag_nlos_scale = None

    @property
    def N(self) -> int:
        return len(self.uavs)

    def place_ues(self, ue_positions) -> None:
        """ue_positions: (N, M, 3) array."""
        ues = np.asarray(ue_positions, dtype=float)
        if ues.ndim != 3 or ues.shape[0] != self.N or ues.shape[2] != 3:
            raise ValueError(f"expected UE positions of shape (N, M, 3), got {ues.shape}")
        p = self.params
        N, M = ues.shape[:2]
        self.ues = ues
        self._ag_los = np.empty((N, M, p.K), dtype=complex)
        self._ag_nlos_scale = np.empty((N, M))
        for n in range(N):
            for m in range(M):
                d = _nonzero_distance(self.irs, ues[n, m])
                self._ag_los[n, m] = ag_los_part(self.irs, ues[n, m], p)
                self._ag_nlos_scale[n, m] = np.sqrt(p.beta0 * d ** (-p.kappa2) / (1.0 + p.beta1))

    def sample_ues(self, M: int, radius: float, rng: np.random.Generator) -> np.ndarray:
        """Uniform placement in a disc of ``radius`` around each UAV's ground point."""
        r = radius * np.sqrt(rng.random((self.N, M)))
        ang = 2.0 * np.pi * rng.random((self.N, M))
        ues = np.zeros((self.N, M, 3))
        ues[..., 0] = self.uavs[:, None, 0] + r * np.cos(ang)
        ues[..., 1] = self.uavs[:, None, 1] + r * np.sin(ang)
        self.place_ues(ues)
        return ues

    def draw(self, rng: np.random.Generator) -> ChannelRealization:
        if self._ag_los is None:
            raise RuntimeError("UE positions not set; call place_ues or sample_ues first")
        nlos = complex_normal(rng, self._ag_los.shape)
        ag = self._ag_los + self._ag_nlos_scale[..., None] * nlos
        return ChannelRealization(aa=self.aa.copy(), ag=ag)
