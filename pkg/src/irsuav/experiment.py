"""Dispatch of configured runs to the scheme runners and CSV emission."""
from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig
from .env import TrajectoryWriter
from .plotdata import emit_plotdata
from .training import Trace, run_scheme, save_agents

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("label", "scheme", "seeds", "final100_mean", "final100_std")


def output_dir(cfg: RunConfig, override=None) -> Path:
    """--out wins, then $IRSUAV_OUT, then the config's ``out`` key."""
    if override:
        return Path(override)
    return Path(os.environ.get("IRSUAV_OUT") or cfg.out)


def _one_run(args):
    cfg, scheme, seed, out, trajectory, save = args
    env_cfg = cfg.env_config(seed)
    on_step, writer = None, None
    if trajectory:
        writer = TrajectoryWriter(out / f"{scheme}_{seed}_trajectory.csv", env_cfg.net.N,
                                  env_cfg.net.M)
        on_step = writer.write
    try:
        res = run_scheme(scheme, env_cfg, cfg.episodes, seed, cfg.ddpg_config(),
                         cfg.ppo_config(), on_step)
    finally:
        if writer is not None:
            writer.close()
    res.trace.write_csv(out / f"{scheme}_{seed}.csv")
    if save:
        save_agents(res, out / f"{scheme}_{seed}_agents")
    return res.trace


def run(cfg: RunConfig, schemes, out: Path, trajectory=False, save_agents=False,
        label: str = "") -> list[Trace]:
    """Run every (scheme, seed) pair; one trace CSV per pair. Returns the traces."""
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, s, seed, out, trajectory, save_agents) for s in schemes for seed in cfg.seeds]
    if cfg["jobs"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            traces = list(pool.map(_one_run, jobs))
    else:
        traces = [_one_run(j) for j in jobs]
    for t in traces:
        log.info("%s seed %d: final-100 mean reward %.5f", t.scheme, t.seed, t.final_mean())
    return traces


def summarize(traces, label: str = "") -> list[list]:
    rows = []
    for scheme in sorted({t.scheme for t in traces}):
        finals = [t.final_mean() for t in traces if t.scheme == scheme]
        seeds = ";".join(str(t.seed) for t in traces if t.scheme == scheme)
        rows.append([label, scheme, seeds, repr(float(np.mean(finals))),
                     repr(float(np.std(finals)))])
    return rows


def write_summary(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        w.writerows(rows)


def run_and_report(cfg: RunConfig, schemes, out: Path, **kw) -> list[Trace]:
    traces = run(cfg, schemes, out, **kw)
    write_summary(summarize(traces), out / "summary.csv")
    emit_plotdata(traces, out / "plotdata.csv")
    return traces


def sweep(cfg: RunConfig, key: str, values, schemes, out: Path, **kw) -> list[Trace]:
    """One sub-directory per value (``{key}{value}/``) and a combined summary."""
    out.mkdir(parents=True, exist_ok=True)
    rows, everything = [], []
    for v in values:
        sub = cfg.with_overrides(**{key: v})
        label = f"{key}={sub[key]}"
        traces = run(sub, schemes, out / f"{key}{sub[key]}", **kw)
        emit_plotdata(traces, out / f"{key}{sub[key]}" / "plotdata.csv")
        rows += summarize(traces, label)
        everything += traces
    write_summary(rows, out / "summary.csv")
    return everything
