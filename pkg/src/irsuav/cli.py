"""Command-line entry point: ``irsuav {train,baseline,sweep,check}``.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime failure
(including a failing ``check``).
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import checks, experiment
from .config import ConfigError, PRESETS, load_config, preset
from .training import Scheme

LEARNED = ("c-ddpg", "p-ddpg", "c-ppo", "p-ppo")
BASELINES = ("mpt", "rss")


def _common(p):
    p.add_argument("--config", help="key = value config file (defaults: reference table)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named preset used instead of --config")
    p.add_argument("--scheme", action="append", help="scheme tag; repeatable")
    p.add_argument("--seed", action="append", type=int, help="seed; repeatable")
    p.add_argument("--episodes", type=int)
    p.add_argument("--out", help="output directory (else $IRSUAV_OUT, else config 'out')")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key")
    p.add_argument("--trajectory", action="store_true", help="also dump per-step trajectories")
    p.add_argument("--save-agents", action="store_true", help="write agent checkpoints")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irsuav", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("train", help="train learned schemes"))
    _common(sub.add_parser("baseline", help="run the MPT / RSS baselines"))
    sw = sub.add_parser("sweep", help="repeat a run over values of one config key")
    _common(sw)
    sw.add_argument("--param", default="K", help="config key to sweep (default K)")
    sw.add_argument("--values", default="10,20,30", help="comma-separated values")
    sub.add_parser("check", help="run the oracle and invariant suites")
    return ap


def _resolve(args):
    if args.preset and args.config:
        raise ConfigError("use either --config or --preset")
    cfg = load_config(args.config) if args.config else preset(args.preset or "table1")
    over = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        over[k.strip()] = v.strip()
    if args.seed:
        over["seeds"] = ",".join(str(s) for s in args.seed)
    if args.episodes is not None:
        over["episodes"] = str(args.episodes)
    if over:
        cfg = cfg.with_overrides(**over)
    return cfg


def _schemes(args, allowed, default):
    if not args.scheme:
        return list(default)
    out = []
    for s in args.scheme:
        try:
            tag = Scheme(s).value
        except ValueError:
            raise ConfigError(f"unknown scheme {s!r}") from None
        if tag not in allowed:
            raise ConfigError(f"scheme {tag!r} not valid for this subcommand")
        out.append(tag)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "check":
        results = checks.run_all()
        for r in results:
            print(r.line())
        return 0 if all(r.passed for r in results) else 2
    try:
        cfg = _resolve(args)
        out = experiment.output_dir(cfg, args.out)
        kw = dict(trajectory=args.trajectory, save_agents=args.save_agents)
        if args.command == "train":
            default = [cfg.scheme.value] if args.config else LEARNED
            schemes = _schemes(args, LEARNED + BASELINES, default)
            traces = experiment.run_and_report(cfg, schemes, out, **kw)
        elif args.command == "baseline":
            schemes = _schemes(args, BASELINES, BASELINES)
            traces = experiment.run_and_report(cfg, schemes, out, **kw)
        else:
            schemes = _schemes(args, LEARNED + BASELINES, [cfg.scheme.value])
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            traces = experiment.sweep(cfg, args.param, values, schemes, out, **kw)
    except ConfigError as exc:
        print(f"irsuav: configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"irsuav: run failed: {exc}", file=sys.stderr)
        return 2
    for t in traces:
        print(f"{t.scheme:7s} seed {t.seed}: final-100 mean reward {t.final_mean():.5f}")
    print(f"outputs in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
