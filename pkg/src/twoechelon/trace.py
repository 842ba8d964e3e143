"""Run configuration and the per-round record every run produces."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .costs import CostParams
from .demand import DemandModel

ETA_RULES = ("2B", "B")
OGD_GRADIENTS = ("unbiased", "ungated")


@dataclass(frozen=True)
class RunConfig:
    """Everything a single seeded run needs.

    ``delta`` defaults to ``1 / (T**2 + 1)``. ``ogd_eta`` overrides the step size of
    the supplier's gradient descent; ``None`` picks ``s_max / (G sqrt(L))``.
    ``ogd_gradient`` picks that descent's gradient estimator.
    ``l1_cap`` bounds the first decentralized epoch.
    """

    T: int
    params: CostParams
    model: DemandModel
    delta: float | None = None
    c1: float = 1.0
    c3: float = 1.0
    eta_rule: str = "2B"
    ogd_eta: float | None = None
    ogd_gradient: str = "unbiased"
    l1_cap: int = 64

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.eta_rule not in ETA_RULES:
            raise ValueError(f"eta_rule must be one of {ETA_RULES}")
        if self.ogd_gradient not in OGD_GRADIENTS:
            raise ValueError(f"ogd_gradient must be one of {OGD_GRADIENTS}")
        if self.l1_cap < 1:
            raise ValueError("l1_cap must be at least 1")

    @property
    def effective_delta(self) -> float:
        return self.delta if self.delta is not None else 1.0 / (self.T * self.T + 1.0)


@dataclass
class EpochRecord:
    m: int
    start: int  # 0-based index of the epoch's first round
    length: int
    s1: float
    s2: float  # supplier level in force at the epoch's end
    omega: float
    publishes: int = 0


TRACE_COLUMNS = (
    "t", "d", "s_hat_1", "s_hat_2", "o", "o_prime", "omega",
    "loss_central", "loss_agent1", "loss_agent2",
)


@dataclass
class Trace:
    mode: str
    header: dict
    d0: float
    demand: np.ndarray
    s_hat_1: np.ndarray
    s_hat_2: np.ndarray
    order: np.ndarray
    external_order: np.ndarray
    omega: np.ndarray
    loss_central: np.ndarray
    loss_agent1: np.ndarray
    loss_agent2: np.ndarray
    target1: np.ndarray
    target2: np.ndarray
    epochs: list[EpochRecord] = field(default_factory=list)

    @property
    def T(self) -> int:
        return len(self.demand)

    def epoch_of_round(self) -> np.ndarray:
        """Epoch index (0-based into ``epochs``) of every round."""
        idx = np.empty(self.T, dtype=int)
        for i, ep in enumerate(self.epochs):
            idx[ep.start:ep.start + ep.length] = i
        return idx

    def write_csv(self, path) -> None:
        cols = (self.demand, self.s_hat_1, self.s_hat_2, self.order, self.external_order,
                self.omega, self.loss_central, self.loss_agent1, self.loss_agent2)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for t in range(self.T):
                w.writerow([t + 1] + [repr(float(c[t])) for c in cols])


def epoch_lengths(T: int, first: int) -> list[int]:
    """Doubling epoch lengths, the last one truncated so they sum to ``T``."""
    out, start, L = [], 0, first
    while start < T:
        out.append(min(L, T - start))
        start += L
        L *= 2
    return out


def nominal_epoch_lengths(T: int, first: int) -> list[int]:
    n = len(epoch_lengths(T, first))
    return [first * 2 ** i for i in range(n)]
