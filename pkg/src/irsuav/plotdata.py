"""Smoothed, episode-aligned series for convergence plots."""
from __future__ import annotations

import csv
from collections import defaultdict

import numpy as np


def moving_average(x, window: int = 25) -> np.ndarray:
    """Trailing mean over full windows.

    Value i averages x[i : i + window] and belongs to episode i + window - 1.
    A window at least as long as the series collapses to one overall mean.
    """
    x = np.asarray(x, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    if x.size == 0:
        return x
    if window >= x.size:
        return np.array([x.mean()])
    c = np.cumsum(np.concatenate([[0.0], x]))
    return (c[window:] - c[:-window]) / window


def smoothed_series(rewards, window: int = 25):
    """(episode indices, smoothed values)."""
    sm = moving_average(rewards, window)
    start = min(window, len(rewards)) - 1
    return np.arange(start, start + len(sm)), sm


def emit_plotdata(traces, path, window: int = 25) -> dict:
    """Write ``scheme,episode,smoothed_reward`` rows, seeds averaged per scheme.

    Returns {scheme: (episodes, values)}.
    """
    by_scheme = defaultdict(list)
    for t in traces:
        by_scheme[t.scheme].append(np.asarray(t.rewards, dtype=float))
    out = {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "episode", "smoothed_reward"])
        for scheme in sorted(by_scheme):
            runs = by_scheme[scheme]
            n = min(len(r) for r in runs)
            mean = np.mean([r[:n] for r in runs], axis=0)
            eps, vals = smoothed_series(mean, window)
            out[scheme] = (eps, vals)
            for e, v in zip(eps, vals):
                w.writerow([scheme, int(e), repr(float(v))])
    return out
