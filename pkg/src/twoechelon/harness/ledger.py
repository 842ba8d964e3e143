"""Regret bookkeeping for a finished run.

The chain regret compares every round's realized loss with the expected
optimum ``H(s1*, s2*)``. The per-agent regrets compare each agent's realized
contract loss with the best fixed base-stock level in hindsight, found by
replaying the realized demands, supplier levels and contract coefficients on
a grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..costs import CostParams
from ..demand import DemandModel
from ..trace import Trace

GRID_STEP = 1e-3


def level_grid(model: DemandModel, step: float = GRID_STEP) -> np.ndarray:
    """Equally spaced candidate levels covering ``[d, D]``."""
    n = int(round((model.D - model.d) / step)) + 1
    return np.linspace(model.d, model.D, n)


def pinball_sums(grid, z, over, under) -> np.ndarray:
    """``sum_t over_t (s - z_t)^+ + under_t (z_t - s)^+`` for every ``s`` in ``grid``.

    ``over`` and ``under`` are scalars or per-round weights. Runs in
    ``O((n + g) log n)`` via sorting and prefix sums.
    """
    z = np.asarray(z, dtype=float)
    over = np.broadcast_to(np.asarray(over, dtype=float), z.shape)
    under = np.broadcast_to(np.asarray(under, dtype=float), z.shape)
    order = np.argsort(z, kind="stable")
    z, over, under = z[order], over[order], under[order]
    zero = np.zeros(1)
    c_over = np.concatenate([zero, np.cumsum(over)])
    c_over_z = np.concatenate([zero, np.cumsum(over * z)])
    c_under = np.concatenate([zero, np.cumsum(under)])
    c_under_z = np.concatenate([zero, np.cumsum(under * z)])
    grid = np.asarray(grid, dtype=float)
    k = np.searchsorted(z, grid, side="right")
    below = grid * c_over[k] - c_over_z[k]
    above = (c_under_z[-1] - c_under_z[k]) - grid * (c_under[-1] - c_under[k])
    return below + above


@dataclass(frozen=True)
class AgentRegrets:
    reg1: float
    reg2: float
    s1_bench: float
    s2_bench: float


def _agent1_targets(trace: Trace, t: int) -> np.ndarray:
    # with o = d, the retailer starts round u short by the supplier's
    # shortfall (d_{u-1} - s_hat_{u-1,2})^+ of the round before
    d = trace.demand[:t]
    short = np.zeros(t)
    if t > 1:
        short[1:] = np.maximum(d[:-1] - trace.s_hat_2[:t - 1], 0.0)
    return d + short


def benchmark_agent_regrets(trace: Trace, demands, params: CostParams, model: DemandModel,
                            t: int | None = None, grid=None) -> AgentRegrets:
    """Per-agent regrets over the first ``t`` rounds against grid-replay benchmarks.

    The retailer's benchmark plays a fixed level ``s`` facing the realized
    supplier levels, so its start-of-round level is ``s`` minus the previous
    round's supplier shortfall. The supplier's benchmark plays a fixed level
    against the realized orders-equal-demands stream and the realized
    contract coefficients. The transfer the retailer receives does not depend
    on its own level, so it is added back as a constant.
    """
    t = trace.T if t is None else int(t)
    if not 1 <= t <= trace.T:
        raise ValueError("t must lie in [1, T]")
    d = np.asarray(demands, dtype=float)[:t]
    grid = level_grid(model) if grid is None else np.asarray(grid, dtype=float)
    omega = trace.omega[:t]

    z1 = _agent1_targets(trace, t)
    cost1 = pinball_sums(grid, z1, params.h1, params.p1)
    transfer = float(np.sum(omega * np.maximum(d - trace.s_hat_2[:t], 0.0)))
    i1 = int(np.argmin(cost1))
    reg1 = float(np.sum(trace.loss_agent1[:t])) - (float(cost1[i1]) - transfer)

    cost2 = pinball_sums(grid, d, params.h2, omega)
    i2 = int(np.argmin(cost2))
    reg2 = float(np.sum(trace.loss_agent2[:t])) - float(cost2[i2])
    return AgentRegrets(reg1, reg2, float(grid[i1]), float(grid[i2]))


def epochwise_agent2_regret(trace: Trace, demands, params: CostParams, model: DemandModel,
                            t: int | None = None, grid=None) -> float:
    """Supplier regret summed over epochs, each against its own best fixed level.

    Within an epoch the contract coefficient is constant, so this is the sum
    of per-epoch regrets of the supplier's learner. It is never smaller than
    the single-comparator regret of :func:`benchmark_agent_regrets`.
    """
    t = trace.T if t is None else int(t)
    d = np.asarray(demands, dtype=float)
    grid = level_grid(model) if grid is None else np.asarray(grid, dtype=float)
    total = 0.0
    for ep in trace.epochs:
        lo, hi = ep.start, min(ep.start + ep.length, t)
        if lo >= hi:
            break
        cost = pinball_sums(grid, d[lo:hi], params.h2, ep.omega)
        total += float(np.sum(trace.loss_agent2[lo:hi])) - float(cost.min())
    return total


@dataclass
class RegretLedger:
    """Cumulative regrets of one run plus per-epoch decisions.

    ``excess`` holds every round's realized chain loss minus ``h_star`` and
    ``cumulative`` is its prefix sum. ``snapshots`` maps each checkpoint to
    ``(Reg_t, Reg_t1, Reg_t2, Reg_t2_epochwise)`` with per-agent benchmarks
    refit on the first ``t`` rounds.
    """

    h_star: float
    excess: np.ndarray
    cumulative: np.ndarray
    epoch_s1: list
    epoch_s2: list
    epoch_omega: list
    snapshots: dict

    @classmethod
    def from_trace(cls, trace: Trace, params: CostParams, model: DemandModel,
                   h_star: float, checkpoints=(), agents: bool = True) -> RegretLedger:
        excess = trace.loss_central - h_star
        cumulative = np.cumsum(excess)
        snaps = {}
        for t in checkpoints:
            if agents:
                ag = benchmark_agent_regrets(trace, trace.demand, params, model, t)
                ep2 = epochwise_agent2_regret(trace, trace.demand, params, model, t)
                snaps[t] = (float(cumulative[t - 1]), ag.reg1, ag.reg2, ep2)
            else:
                nan = float("nan")
                snaps[t] = (float(cumulative[t - 1]), nan, nan, nan)
        return cls(
            h_star=h_star,
            excess=excess,
            cumulative=cumulative,
            epoch_s1=[ep.s1 for ep in trace.epochs],
            epoch_s2=[ep.s2 for ep in trace.epochs],
            epoch_omega=[ep.omega for ep in trace.epochs],
            snapshots=snaps,
        )

    def regret(self, t: int) -> float:
        return float(self.cumulative[t - 1])
