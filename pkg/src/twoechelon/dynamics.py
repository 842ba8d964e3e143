"""Round-by-round state machine of the retailer/supplier chain.

The functions only use ``+``, ``-``, ``min``, ``max`` and comparisons, so they
run unchanged on :class:`fractions.Fraction` inputs; the tests use that to
check steady-state identities in exact arithmetic.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Union

import numpy as np

from .costs import CostParams

Target = Union[float, Callable[[float], float]]


def _pos(x):
    return x if x > 0 else x - x


def _neg(x):
    return -x if x < 0 else x - x


class ChainState(NamedTuple):
    """Inventory positions at the start of round ``t``.

    ``s_tilde_*`` hold the previous round's post-demand levels and
    ``pending_shipment`` is the supplier's shortfall owed to the retailer,
    delivered after this round's demand.
    """

    t: int
    s_hat_1: float
    s_hat_2: float
    s_tilde_1: float
    s_tilde_2: float
    pending_shipment: float
    last_demand: float


class RoundOutcome(NamedTuple):
    demand: float
    order: float
    external_order: float
    loss_central: float
    loss_agent1_contract: float
    loss_agent2_contract: float
    omega: float


def init_chain(target1, target2, d0) -> ChainState:
    """Chain stocked at the initial targets before round 1.

    ``d0`` is the extra demand draw standing in for ``d_{t-1}`` at ``t = 1``.
    """
    if target1 < 0 or target2 < 0:
        raise ValueError("initial targets must be nonnegative")
    return ChainState(1, target1, target2, target1, target2, target1 - target1, d0)


def step(state: ChainState, target1, target2: Target, d_t, omega_t,
         params: CostParams) -> tuple[ChainState, RoundOutcome]:
    """Advance one round.

    ``target2`` may be a callable; it is then called with the retailer's
    order ``o_t`` only and must return the supplier's order-up-to level. This
    is how a supplier-side learner plugs in without ever seeing ``d_t``.
    """
    s1, s2 = state.s_hat_1, state.s_hat_2
    s1_tilde = s1 - d_t + state.pending_shipment
    order = _pos(target1 - s1_tilde)
    s2_tilde = s2 - order
    level2 = target2(order) if callable(target2) else target2
    ext_order = _pos(level2 - s2_tilde)
    pending = _pos(order - s2)
    if s2 >= order:
        next1 = target1 if order > 0 else s1_tilde
    else:
        next1 = s1_tilde + s2
    next2 = level2 if ext_order > 0 else s2_tilde

    gap1 = s1 - d_t
    retailer = params.h1 * _pos(gap1) + params.p1 * _neg(gap1)
    held = _pos(s2 - order)
    short = _neg(s2 - order)
    outcome = RoundOutcome(
        demand=d_t,
        order=order,
        external_order=ext_order,
        loss_central=retailer + params.h2 * held,
        loss_agent1_contract=retailer - omega_t * short,
        loss_agent2_contract=params.h2 * held + omega_t * short,
        omega=omega_t,
    )
    new_state = ChainState(state.t + 1, next1, next2, s1_tilde, s2_tilde, pending, d_t)
    return new_state, outcome


def effective_level(s1, s2, d_prev):
    """Retailer's start-of-round level under fixed targets in steady state."""
    if isinstance(s2, np.ndarray) or isinstance(d_prev, np.ndarray):
        return np.where(s2 > d_prev, s1, s1 + s2 - d_prev)
    return s1 if s2 > d_prev else s1 + s2 - d_prev


def surrogate_hhat(s1, s2, d_t, d_prev, params: CostParams):
    """Stochastic chain loss of the fixed pair ``(s1, s2)`` given two demands."""
    level = effective_level(s1, s2, d_prev)
    gap = level - d_t
    if isinstance(gap, np.ndarray):
        held2 = np.maximum(s2 - d_t, 0.0)
        return params.h1 * np.maximum(gap, 0.0) + params.p1 * np.maximum(-gap, 0.0) + params.h2 * held2
    return params.h1 * _pos(gap) + params.p1 * _neg(gap) + params.h2 * _pos(s2 - d_t)
