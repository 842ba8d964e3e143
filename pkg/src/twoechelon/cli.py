"""Command line entry point: ``run``, ``oracle`` and ``selftest``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .costs import CostParams, NumericError, optimal_levels
from .demand import parse_demand
from .harness.config import MODES, ConfigError, load_config
from .harness.runner import run_trials

EXIT_INVALID = 2


def _costs(text: str) -> CostParams:
    try:
        vals = [float(v) for v in text.split(",")]
        if len(vals) not in (3, 4):
            raise ValueError("expected h1,h2,p1 or h1,h2,p1,alpha")
        return CostParams(*vals)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad costs {text!r}: {exc}") from exc


def _demand(text: str):
    try:
        return parse_demand(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twoechelon", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a seeded multi-trial experiment")
    run.add_argument("--config", required=True, help="TOML experiment file")
    run.add_argument("--mode", choices=MODES)
    run.add_argument("--T", type=int, dest="T")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int)
    run.add_argument("--full-paper-scale", action="store_true",
                     help="use the full horizon (800000) and 128 trials")

    orc = sub.add_parser("oracle", help="print the optimal levels of one scenario")
    orc.add_argument("--dist", required=True, type=_demand,
                     help="e.g. 'uniform(1,4)', 'gaussian(3,1,1,4)', 'exponential(3,1,4)'")
    orc.add_argument("--costs", required=True, type=_costs, help="h1,h2,p1[,alpha]")

    sub.add_parser("selftest", help="run the bundled test suite")
    return ap


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.full_paper_scale:
            cfg = cfg.full_scale()
        cfg = cfg.with_overrides(mode=args.mode, T=args.T, trials=args.trials,
                                 seed=args.seed, out=args.out, workers=args.workers)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    summaries = run_trials(cfg)
    for s in summaries:
        print(f"{s.name} {s.mode}: T={s.checkpoints[-1]} regret={s.regret_mean[-1]:.4g} "
              f"(std {s.regret_std[-1]:.3g}) s2_err={s.s2_err_mean[-1]:.3g}")
    print(f"wrote {Path(cfg.out) / 'regret.csv'} and {Path(cfg.out) / 'agent_regret.csv'}")
    return 0


def _cmd_oracle(args) -> int:
    try:
        lv = optimal_levels(args.costs, args.dist)
    except (NumericError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"s1* = {lv.s1_star!r}")
    print(f"s2* = {lv.s2_star!r}")
    print(f"omega* = {lv.omega_star!r}")
    print(f"H* = {lv.h_star!r}")
    return 0


def _cmd_selftest() -> int:
    try:
        import pytest
    except ImportError:
        print("error: selftest needs the test extra (pip install -e '.[test]')", file=sys.stderr)
        return EXIT_INVALID

    tests = Path(__file__).resolve().parents[2] / "tests"
    if not tests.is_dir():
        print("error: test directory not found next to the source tree", file=sys.stderr)
        return EXIT_INVALID
    return int(pytest.main(["-q", str(tests), "-m", "not slow"]))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "oracle":
        return _cmd_oracle(args)
    return _cmd_selftest()


if __name__ == "__main__":
    sys.exit(main())
