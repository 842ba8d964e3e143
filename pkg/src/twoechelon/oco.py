"""One-dimensional online convex optimisation steps.

Decisions are scalars on a closed interval, so the matrix-weighted projection
of Online Newton Step reduces to clamping and ``M`` is a running scalar.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def pgd_step(x: float, g: float, eta: float, domain: tuple[float, float]) -> float:
    """Projected gradient step ``clamp(x - eta * g)``."""
    lo, hi = domain
    if lo > hi:
        raise ValueError("empty domain")
    return _clamp(x - eta * g, lo, hi)


class OnsState(NamedTuple):
    x: float
    M: float
    eta: float
    epsilon: float
    lo: float
    hi: float


def ons_init(x0: float, eta: float, epsilon: float, domain: tuple[float, float]) -> OnsState:
    lo, hi = domain
    if lo > hi:
        raise ValueError("empty domain")
    if eta <= 0 or epsilon <= 0:
        raise ValueError("eta and epsilon must be positive")
    return OnsState(_clamp(x0, lo, hi), epsilon, eta, epsilon, lo, hi)


def ons_step(state: OnsState, g: float) -> OnsState:
    M = state.M + g * g
    x = _clamp(state.x - state.eta * g / M, state.lo, state.hi)
    return state._replace(x=x, M=M)


class LazyOnsState(NamedTuple):
    """ONS whose played decision ``w`` only moves at steps ``1, 2, 4, ...``.

    ``t`` counts the losses fed so far, so the decision in force is the one
    for step ``t + 1``. ``publishes`` counts the steps (up to ``horizon``) at
    which a fresh average was published, including step 1.
    """

    inner: OnsState
    t: int
    k: int
    sum_x: float
    w: float
    horizon: int
    publishes: int


def lazy_ons_init(x0: float, eta: float, epsilon: float, domain: tuple[float, float],
                  horizon: int) -> LazyOnsState:
    inner = ons_init(x0, eta, epsilon, domain)
    return LazyOnsState(inner, 0, 1, inner.x, inner.x, int(horizon), 1)


def lazy_ons_point(state: LazyOnsState) -> float:
    """Inner iterate at which the next subgradient must be taken."""
    return state.inner.x


def lazy_ons_decision(state: LazyOnsState) -> float:
    return state.w


def lazy_ons_feed(state: LazyOnsState, g: float) -> LazyOnsState:
    """Feed the subgradient of the current loss taken at the inner iterate."""
    inner = ons_step(state.inner, g)
    t = state.t + 1
    sum_x = state.sum_x + inner.x
    nxt = t + 1
    if nxt & (nxt - 1) == 0 and nxt <= state.horizon:
        return LazyOnsState(inner, t, state.k + 1, sum_x, sum_x / nxt, state.horizon,
                            state.publishes + 1)
    return LazyOnsState(inner, t, state.k, sum_x, state.w, state.horizon, state.publishes)


def bernstein_constant(omega: float, h2: float, gamma: float) -> float:
    """Bernstein constant of the supplier's two-sided linear loss, continuous demand."""
    return max(omega * omega, h2 * h2) / (gamma * (h2 + omega))


def bernstein_constant_discrete(omega: float, h2: float, atoms, probs) -> float:
    """Bernstein constant for a finite demand law.

    Requires the target quantile ``omega / (h2 + omega)`` to fall strictly
    between two consecutive CDF values.
    """
    atoms = np.asarray(atoms, dtype=float)
    order = np.argsort(atoms)
    atoms = atoms[order]
    cum = np.cumsum(np.asarray(probs, dtype=float)[order])
    kappa = omega / (h2 + omega)
    i = int(np.searchsorted(cum, kappa, side="left"))
    below = cum[i - 1] if i > 0 else 0.0
    if np.isclose(cum[i], kappa) or np.isclose(below, kappa):
        raise ValueError("target quantile coincides with an atom's CDF value")
    theta = min(cum[i] - kappa, kappa - below)
    return atoms.max() * max(omega * omega, h2 * h2) / (theta * (h2 + omega))
