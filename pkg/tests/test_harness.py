import csv
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from twoechelon.costs import CostParams, optimal_levels
from twoechelon.decentralized import run_decentralized
from twoechelon.demand import DemandModel, sample
from twoechelon.dynamics import init_chain, step
from twoechelon.harness import (
    ConfigError,
    ExperimentConfig,
    RegretLedger,
    Welford,
    benchmark_agent_regrets,
    default_checkpoints,
    epochwise_agent2_regret,
    fit_growth,
    load_config,
    pinball_sums,
    run_trials,
)
from twoechelon.harness.config import config_from_dict
from twoechelon.harness.ledger import level_grid
from twoechelon.harness.runner import REGRET_COLUMNS
from twoechelon.trace import RunConfig, Trace

P = CostParams(0.3, 0.1, 0.5)
U = DemandModel.uniform(1.0, 4.0)


# -- growth fit and one-pass statistics ------------------------------------------------

def test_fit_growth_exact_power_law():
    ts = [2**k for k in range(10, 18)]
    assert fit_growth([(t, 3 * math.sqrt(t)) for t in ts]) == pytest.approx(0.5, abs=1e-6)
    assert fit_growth([(t, 7.0) for t in ts]) == pytest.approx(0.0, abs=1e-9)


def test_fit_growth_t_log_t():
    ts = [2**k for k in range(10, 18)]
    a = fit_growth([(t, t * math.log(t)) for t in ts])
    assert 1.0 < a < 1.15


@pytest.mark.parametrize("pts", [[(1, 1), (2, 2)], [(1, 1), (2, 0), (4, 3)], [(1, 1), (2, -1), (4, 3)],
                                 [(0, 1), (2, 1), (4, 3)]])
def test_fit_growth_rejects(pts):
    with pytest.raises(ValueError):
        fit_growth(pts)


@settings(max_examples=50)
@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3), min_size=2, max_size=40))
def test_welford_matches_two_pass(rows):
    w = Welford()
    for r in rows:
        w.push(r)
    mean, std = oracles.two_pass_mean_std(rows)
    assert np.allclose(w.mean, mean, rtol=1e-10, atol=1e-6)
    assert np.allclose(w.std, std, rtol=1e-10, atol=1e-6)


def test_welford_single_and_empty():
    w = Welford()
    with pytest.raises(ValueError):
        _ = w.mean
    w.push([2.0, 3.0])
    assert np.array_equal(w.std, [0.0, 0.0])


# -- benchmarks -----------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1, 4), min_size=1, max_size=50), st.floats(0.01, 2), st.floats(0.01, 2))
def test_pinball_sums_brute_force(z, over, under):
    grid = np.linspace(0.5, 4.5, 41)
    want = [oracles.pinball(s, np.array(z), over, under).sum() for s in grid]
    assert np.allclose(pinball_sums(grid, z, over, under), want, atol=1e-9)


def test_pinball_sums_per_round_weights():
    rng = np.random.default_rng(0)
    z, w = rng.uniform(1, 4, 200), rng.uniform(0, 1, 200)
    grid = level_grid(U, 0.01)
    want = [oracles.pinball(s, z, 0.1, w).sum() for s in grid]
    assert np.allclose(pinball_sums(grid, z, 0.1, w), want, atol=1e-9)


def test_supplier_benchmark_is_empirical_quantile():
    tr = run_decentralized(RunConfig(5000, P, U), np.random.default_rng(3))
    omega = 0.1
    tr.omega[:] = omega  # constant contract for the identity below
    ag = benchmark_agent_regrets(tr, tr.demand, P, U)
    q = np.sort(tr.demand)[math.ceil(omega / (omega + P.h2) * tr.T) - 1]
    assert abs(ag.s2_bench - q) <= 1e-3 + 1e-12


def _fixed_policy_trace(T, seed):
    """A run that plays the optimal fixed pair from the start."""
    rng = np.random.default_rng(seed)
    lv = optimal_levels(P, U)
    d = sample(U, rng, T + 1)
    state = init_chain(lv.s1_star, lv.s2_star, d[0])
    cols = {k: np.empty(T) for k in ("s_hat_1", "s_hat_2", "order", "external_order", "omega",
                                     "loss_central", "loss_agent1", "loss_agent2", "target1", "target2")}
    for t in range(T):
        cols["s_hat_1"][t], cols["s_hat_2"][t] = state.s_hat_1, state.s_hat_2
        state, out = step(state, lv.s1_star, lv.s2_star, d[t + 1], lv.omega_star, P)
        cols["order"][t], cols["external_order"][t] = out.order, out.external_order
        cols["omega"][t] = lv.omega_star
        cols["loss_central"][t] = out.loss_central
        cols["loss_agent1"][t], cols["loss_agent2"][t] = out.loss_agent1_contract, out.loss_agent2_contract
        cols["target1"][t], cols["target2"][t] = lv.s1_star, lv.s2_star
    return Trace("fixed", {}, d[0], d[1:], **cols), lv


def test_self_benchmark_regret_is_small():
    T = 20_000
    tr, lv = _fixed_policy_trace(T, 4)
    ag = benchmark_agent_regrets(tr, tr.demand, P, U)
    # a fixed level is at most as good as the hindsight optimum, and within
    # sampling noise of it; the grid adds at most step * T * Lipschitz
    slack = 1e-3 * T * (P.h1 + P.p1)
    assert -1e-9 <= ag.reg2 <= 3 * math.sqrt(T) * 0.2 + slack
    assert -1e-9 <= ag.reg1 <= 3 * math.sqrt(T) * 0.8 + slack


def test_epochwise_regret_bounds_single_comparator():
    tr = run_decentralized(RunConfig(6000, P, U), np.random.default_rng(7))
    for t in (100, 1000, 6000):
        single = benchmark_agent_regrets(tr, tr.demand, P, U, t).reg2
        assert epochwise_agent2_regret(tr, tr.demand, P, U, t) >= single - 1e-9


def test_ledger_prefix_sums():
    tr = run_decentralized(RunConfig(4096, P, U), np.random.default_rng(1))
    h_star = optimal_levels(P, U).h_star
    cps = [64, 1000, 4096]
    led = RegretLedger.from_trace(tr, P, U, h_star, cps)
    running = 0.0
    for t in range(tr.T):
        running += float(tr.loss_central[t]) - h_star
        if t + 1 in cps:
            assert led.regret(t + 1) == pytest.approx(running, rel=1e-12, abs=1e-9)
            assert led.snapshots[t + 1][0] == led.regret(t + 1)
    for t in cps:
        again = benchmark_agent_regrets(tr, tr.demand, P, U, t)
        assert led.snapshots[t][1:3] == (again.reg1, again.reg2)
    assert led.epoch_omega == [ep.omega for ep in tr.epochs]


# -- configuration ----------------------------------------------------------------------

def test_default_checkpoints():
    assert default_checkpoints(1) == [1]
    assert default_checkpoints(2**12) == [1024, 2048, 4096]
    assert default_checkpoints(3000) == [1024, 2048, 3000]


def test_desk_defaults():
    cfg = ExperimentConfig()
    assert (cfg.T, cfg.trials) == (2**17, 16)
    assert cfg.effective_checkpoints == [2**k for k in range(10, 18)]
    big = cfg.full_scale()
    assert (big.T, big.trials) == (800_000, 128)


@pytest.mark.parametrize("bad", [{"T": 0}, {"trials": 0}, {"delta": 1.5}, {"mode": "solo"},
                                 {"eta_rule": "x"}, {"demands": ["poisson(2)"]},
                                 {"demands": ["discrete(1:1)"]}, {"costs": [[0.1, 0.3, 0.5]]},
                                 {"costs": [[0.3, 0.1]]}, {"checkpoints": [5, 3]},
                                 {"T": 10, "checkpoints": [20]}, {"unknown_key": 1}])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_load_config(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text('T = 64\ntrials = 2\nmode = "centralized"\ndemands = ["uniform(1,4)"]\n'
                    'costs = [[0.3, 0.1, 0.5]]\nc1 = 1\nseed = 9\n')
    cfg = load_config(path)
    assert cfg.T == 64 and cfg.c1 == 1.0 and cfg.costs == ((0.3, 0.1, 0.5),)
    bad = tmp_path / "bad.toml"
    bad.write_text("T = [")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


# -- runs -----------------------------------------------------------------------------

def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_smallest_run(tmp_path):
    cfg = ExperimentConfig(T=1, trials=1, mode="centralized", out=str(tmp_path), workers=1)
    run_trials(cfg)
    rows = _rows(tmp_path / "regret.csv")
    assert tuple(rows[0]) == REGRET_COLUMNS
    assert len(rows) == 2 and rows[1][2] == "1"


def test_csv_round_trips_floats(tmp_path):
    cfg = ExperimentConfig(T=300, trials=3, mode="both", out=str(tmp_path), workers=1,
                           checkpoints=(100, 300))
    summaries = run_trials(cfg)
    rows = _rows(tmp_path / "regret.csv")[1:]
    assert len(rows) == 4
    first = summaries[0]
    assert float(rows[0][3]) == first.regret_mean[0]
    assert float(rows[1][4]) == first.regret_std[1]
    assert rows[0][7] == "nan"  # the planner has no contract
    agent_rows = _rows(tmp_path / "agent_regret.csv")[1:]
    assert {r[1] for r in agent_rows} == {"decentralized"}


def test_trace_files_written(tmp_path):
    cfg = ExperimentConfig(T=50, trials=2, mode="decentralized", out=str(tmp_path), traces=True,
                           workers=1)
    run_trials(cfg)
    files = sorted((tmp_path / "traces").iterdir())
    assert len(files) == 2
    rows = _rows(files[0])
    assert rows[0] == ["t", "d", "s_hat_1", "s_hat_2", "o", "o_prime", "omega",
                       "loss_central", "loss_agent1", "loss_agent2"]
    assert len(rows) == 51


def test_pool_and_inline_agree(tmp_path):
    base = dict(T=400, trials=3, mode="both", checkpoints=(200, 400), seed=5)
    run_trials(ExperimentConfig(out=str(tmp_path / "a"), workers=1, **base))
    run_trials(ExperimentConfig(out=str(tmp_path / "b"), workers=2, **base))
    for name in ("regret.csv", "agent_regret.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_output(tmp_path):
    base = dict(T=200, trials=2, mode="centralized", workers=1)
    a = run_trials(ExperimentConfig(seed=1, **base), write=False)[0]
    b = run_trials(ExperimentConfig(seed=2, **base), write=False)[0]
    assert a.regret_mean[-1] != b.regret_mean[-1]


@pytest.mark.parametrize("name,scenarios", [("desk.toml", 1), ("full.toml", 12)])
def test_shipped_configs_load(name, scenarios):
    cfg = load_config(Path(__file__).parent.parent / "configs" / name)
    assert len(cfg.scenarios()) == scenarios
