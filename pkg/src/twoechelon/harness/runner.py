"""Seeded multi-trial execution and CSV output."""
from __future__ import annotations

import csv
import multiprocessing
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import costs
from ..centralized import run_centralized
from ..decentralized import run_decentralized
from ..trace import RunConfig
from .config import ExperimentConfig
from .ledger import RegretLedger
from .stats import Welford

REGRET_COLUMNS = ("scenario", "mode", "t", "regret_mean", "regret_std",
                  "s1_err_mean", "s2_err_mean", "omega_err_mean")
AGENT_COLUMNS = ("scenario", "mode", "t", "regret1_mean", "regret1_std",
                 "regret2_mean", "regret2_std", "regret2_epochwise_mean",
                 "regret2_epochwise_std")
RUNNERS = {"centralized": run_centralized, "decentralized": run_decentralized}


@dataclass
class TrialResult:
    """Checkpoint series of one seeded run (arrays aligned with the checkpoints).

    ``final_*`` are the decisions in force in the last round.
    """

    scenario: int
    mode: str
    trial: int
    regret: np.ndarray
    regret1: np.ndarray
    regret2: np.ndarray
    regret2_epochwise: np.ndarray
    s1_err: np.ndarray
    s2_err: np.ndarray
    omega_err: np.ndarray
    final_s1: float
    final_s2: float
    final_omega: float


@dataclass
class ScenarioSummary:
    name: str
    mode: str
    checkpoints: list
    regret_mean: np.ndarray
    regret_std: np.ndarray
    regret1_mean: np.ndarray
    regret1_std: np.ndarray
    regret2_mean: np.ndarray
    regret2_std: np.ndarray
    regret2_epochwise_mean: np.ndarray
    regret2_epochwise_std: np.ndarray
    s1_err_mean: np.ndarray
    s2_err_mean: np.ndarray
    omega_err_mean: np.ndarray
    trials: list


def trial_rng(seed: int, scenario: int, trial: int) -> np.random.Generator:
    """Independent stream per (scenario, trial); both modes share it."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(scenario, trial)))


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def run_trial(cfg: ExperimentConfig, scenario: int, trial: int, mode: str,
              oracle: costs.OptimalLevels, trace_dir: str | None = None) -> TrialResult:
    """One seeded run of ``mode`` on scenario number ``scenario``."""
    name, params, model = cfg.scenarios()[scenario]
    run_cfg = RunConfig(cfg.T, params, model, delta=cfg.delta, c1=cfg.c1, c3=cfg.c3,
                        eta_rule=cfg.eta_rule, ogd_gradient=cfg.ogd_gradient,
                        l1_cap=cfg.l1_cap)
    trace = RUNNERS[mode](run_cfg, trial_rng(cfg.seed, scenario, trial))
    trace.header["seed"] = (cfg.seed, scenario, trial)
    cps = cfg.effective_checkpoints
    ledger = RegretLedger.from_trace(trace, params, model, oracle.h_star, cps,
                                     agents=mode == "decentralized")
    idx = np.asarray(cps) - 1
    if trace_dir is not None:
        trace.write_csv(Path(trace_dir) / f"{_slug(name)}__{mode}__trial{trial:04d}.csv")
    omega_err = (np.abs(trace.omega[idx] - oracle.omega_star) if mode == "decentralized"
                 else np.full(len(cps), np.nan))
    snaps = np.array([ledger.snapshots[t] for t in cps])
    return TrialResult(
        scenario=scenario, mode=mode, trial=trial,
        regret=snaps[:, 0], regret1=snaps[:, 1], regret2=snaps[:, 2],
        regret2_epochwise=snaps[:, 3],
        s1_err=np.abs(trace.target1[idx] - oracle.s1_star),
        s2_err=np.abs(trace.target2[idx] - oracle.s2_star),
        omega_err=omega_err,
        final_s1=float(trace.target1[-1]), final_s2=float(trace.target2[-1]),
        final_omega=float(trace.omega[-1]),
    )


def _job(args):
    return run_trial(*args)


def _summarize(name, mode, cps, results) -> ScenarioSummary:
    keys = ("regret", "regret1", "regret2", "regret2_epochwise", "s1_err", "s2_err", "omega_err")
    acc = {k: Welford() for k in keys}
    for r in sorted(results, key=lambda r: r.trial):
        for k, w in acc.items():
            w.push(getattr(r, k))
    return ScenarioSummary(
        name=name, mode=mode, checkpoints=list(cps),
        regret_mean=acc["regret"].mean, regret_std=acc["regret"].std,
        regret1_mean=acc["regret1"].mean, regret1_std=acc["regret1"].std,
        regret2_mean=acc["regret2"].mean, regret2_std=acc["regret2"].std,
        regret2_epochwise_mean=acc["regret2_epochwise"].mean,
        regret2_epochwise_std=acc["regret2_epochwise"].std,
        s1_err_mean=acc["s1_err"].mean, s2_err_mean=acc["s2_err"].mean,
        omega_err_mean=acc["omega_err"].mean,
        trials=sorted(results, key=lambda r: r.trial),
    )


def _fmt(x) -> str:
    return repr(float(x))


def write_summaries(summaries, out_dir) -> tuple[Path, Path]:
    """Write the checkpoint CSV and the per-agent regret CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    main, agents = out / "regret.csv", out / "agent_regret.csv"
    with open(main, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REGRET_COLUMNS)
        for s in summaries:
            for i, t in enumerate(s.checkpoints):
                w.writerow([s.name, s.mode, t, _fmt(s.regret_mean[i]), _fmt(s.regret_std[i]),
                            _fmt(s.s1_err_mean[i]), _fmt(s.s2_err_mean[i]),
                            _fmt(s.omega_err_mean[i])])
    with open(agents, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGENT_COLUMNS)
        for s in summaries:
            if s.mode != "decentralized":
                continue
            for i, t in enumerate(s.checkpoints):
                w.writerow([s.name, s.mode, t, _fmt(s.regret1_mean[i]), _fmt(s.regret1_std[i]),
                            _fmt(s.regret2_mean[i]), _fmt(s.regret2_std[i]),
                            _fmt(s.regret2_epochwise_mean[i]),
                            _fmt(s.regret2_epochwise_std[i])])
    return main, agents


def run_trials(cfg: ExperimentConfig, write: bool = True) -> list[ScenarioSummary]:
    """Run every (scenario, mode, trial) and aggregate per (scenario, mode).

    Trials go to a process pool of ``cfg.workers`` processes (one process
    means inline execution). Aggregation sorts by trial number, so the output
    does not depend on completion order.
    """
    scen = cfg.scenarios()
    oracles = [costs.optimal_levels(p, m) for _, p, m in scen]
    trace_dir = None
    if write and cfg.traces:
        trace_dir = str(Path(cfg.out) / "traces")
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, i, k, mode, oracles[i], trace_dir)
            for i in range(len(scen)) for mode in cfg.modes for k in range(cfg.trials)]
    workers = cfg.workers or os.cpu_count() or 1
    workers = min(workers, len(jobs))
    if workers == 1:
        results = [_job(j) for j in jobs]
    else:
        with multiprocessing.get_context("spawn").Pool(workers) as pool:
            results = pool.map(_job, jobs, chunksize=1)

    buckets: dict[tuple[int, str], list[TrialResult]] = {}
    for r in results:
        buckets.setdefault((r.scenario, r.mode), []).append(r)
    summaries = [
        _summarize(scen[i][0], mode, cfg.effective_checkpoints, buckets[(i, mode)])
        for i in range(len(scen)) for mode in cfg.modes
    ]
    if write:
        write_summaries(summaries, cfg.out)
    return summaries
