"""Straight-line reference computations.

Nothing here calls into ``metrics`` or vectorised channel code: every quantity
is rebuilt from scalar complex arithmetic so it can cross-check those paths.
"""
from __future__ import annotations

import cmath
import itertools
import math


def effective_channel(H, theta, h) -> complex:
    acc = 0j
    for k in range(len(H)):
        acc += complex(H[k]) * cmath.exp(1j * float(theta[k])) * complex(h[k])
    return acc


def network_metrics(aa, ag, powers, theta, B, P_fixed, noise_power) -> dict:
    """SINR, rates, totals and EE for aa (N x K) and ag (N x M x K)."""
    N, M = len(aa), len(ag[0])
    gain = [[[abs(effective_channel(aa[i], theta, ag[n][m])) ** 2 for m in range(M)]
             for n in range(N)] for i in range(N)]
    sinr = [[0.0] * M for _ in range(N)]
    rate = [[0.0] * M for _ in range(N)]
    total_rate = 0.0
    for n in range(N):
        for m in range(M):
            interf = 0.0
            for i in range(N):
                if i != n:
                    interf += float(powers[i]) * gain[i][n][m]
            sinr[n][m] = float(powers[n]) * gain[n][n][m] / (interf + noise_power)
            rate[n][m] = B * math.log2(1.0 + sinr[n][m])
            total_rate += rate[n][m]
    total_power = sum(float(p) for p in powers) + P_fixed
    return {"sinr": sinr, "rate": rate, "total_rate": total_rate,
            "total_power": total_power, "ee": total_rate / total_power}


def exhaustive_max_ee(aa, ag, P_max, B, P_fixed, noise_power, power_levels=8, phase_levels=8):
    """Best EE over a grid: powers P_max*j/L (j = 1..L), phases 2*pi*q/Q.

    Returns (best_ee, best_powers, best_phases). Only the relative phases
    matter, but the full grid is enumerated.
    """
    N, K = len(aa), len(aa[0])
    pw = [P_max * j / power_levels for j in range(1, power_levels + 1)]
    ph = [2.0 * math.pi * q / phase_levels for q in range(phase_levels)]
    best = (-1.0, None, None)
    for theta in itertools.product(ph, repeat=K):
        for p in itertools.product(pw, repeat=N):
            ee = network_metrics(aa, ag, p, theta, B, P_fixed, noise_power)["ee"]
            if ee > best[0]:
                best = (ee, p, theta)
    return best


def naive_forward(sizes, params, output, x):
    """Loop-based MLP forward pass (ReLU hidden) for one input vector."""
    h = [float(v) for v in x]
    n_layers = len(sizes) - 1
    for li in range(n_layers):
        W, b = params[2 * li], params[2 * li + 1]
        z = []
        for j in range(sizes[li + 1]):
            acc = float(b[j])
            for i in range(sizes[li]):
                acc += h[i] * float(W[i][j])
            z.append(acc)
        if li < n_layers - 1:
            h = [max(v, 0.0) for v in z]
        elif output == "tanh":
            h = [math.tanh(v) for v in z]
        else:
            h = z
    return h


def clipped_objective_cases(p: float, A: float, eps: float) -> float:
    """Case-split form: min(p, 1+eps) A for A >= 0, max(p, 1-eps) A for A < 0."""
    if A >= 0:
        return min(p, 1.0 + eps) * A
    return max(p, 1.0 - eps) * A
