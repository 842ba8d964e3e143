"""Decentralized protocol: retailer, supplier and a contract maker.

The retailer observes demand and sets empirical-quantile levels per epoch.
The supplier only sees the retailer's orders and learns with lazy ONS. The
contract maker prices supplier shortfalls with a coefficient ``omega`` that
aligns the supplier's selfish optimum with the chain optimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import costs
from .centralized import agent1_level, agent2_ogd, prior_model
from .costs import CostParams
from .demand import DemandModel, ecdf_build, ecdf_eval, inverse_cdf, sample
from .dynamics import init_chain, step
from .oco import bernstein_constant, lazy_ons_decision, lazy_ons_feed, lazy_ons_init, lazy_ons_point
from .trace import EpochRecord, RunConfig, Trace, epoch_lengths, nominal_epoch_lengths


@dataclass(frozen=True)
class Contract:
    omega: float
    m: int


def omega_cap(params: CostParams) -> float:
    return params.h2 + params.p1 + 1.0


def contract_maker(samples, params: CostParams, model: DemandModel, delta: float, T: int,
                   c1: float, eta: float | None = None, d_prev: float | None = None,
                   gradient: str = "unbiased") -> float:
    """Estimate the coordinating coefficient from one epoch of demand."""
    ecdf = ecdf_build(samples)
    s_L = agent2_ogd(samples, ecdf, params, model, delta, T, c1, eta=eta, d_prev=d_prev,
                     gradient=gradient)
    return omega_from_cdf_value(float(ecdf_eval(ecdf, s_L)), params)


def omega_from_cdf_value(phi: float, params: CostParams) -> float:
    if phi >= 1.0:
        return omega_cap(params)
    return min(costs.omega_from_cdf(phi, params.h2), omega_cap(params))


def agent2_subgradient(o_t: float, x_inner: float, omega: float, params: CostParams) -> float:
    """Subgradient of ``h2 (x - o)^+ + omega (x - o)^-`` at ``x_inner`` (0 at the kink)."""
    if x_inner > o_t:
        return params.h2
    if x_inner < o_t:
        return -omega
    return 0.0


def ons_learning_rate(omega: float, params: CostParams, gamma: float, rule: str = "2B") -> float:
    """ONS step size ``2B`` (``rule='2B'``) or ``B`` (``rule='B'``) for Bernstein constant ``B``."""
    B = bernstein_constant(omega, params.h2, gamma)
    if rule == "2B":
        return 2.0 * B
    if rule == "B":
        return B
    raise ValueError(f"unknown eta rule {rule!r}")


def initial_epoch_length(params: CostParams, T: int, delta: float, c3: float,
                         cap: int) -> tuple[int, float]:
    """First epoch length and the uncapped warm-up formula it was clipped from."""
    formula = 256.0 * (params.h2 + params.p1) ** 4 * c3 ** 4 * math.log(T / delta) ** 4
    formula = formula / params.h2 ** 4 if params.h2 > 0 else math.inf
    return max(1, min(cap, math.ceil(formula))), formula


def run_decentralized(config: RunConfig, rng: np.random.Generator) -> Trace:
    """Play the three-party protocol for ``config.T`` rounds."""
    params, model, T = config.params, config.model, config.T
    if model.gamma is None:
        raise ValueError("the decentralized protocol needs a density lower bound (continuous demand)")
    delta = config.effective_delta
    L1, formula = initial_epoch_length(params, T, delta, config.c3, config.l1_cap)
    draws = sample(model, rng, T + 1)
    d0, demand = float(draws[0]), draws[1:]

    prior = costs.optimal_levels(params, prior_model(model))
    omega = min(prior.omega_star, omega_cap(params))
    s1 = prior.s1_star
    decision = float(inverse_cdf(prior_model(model), omega / (omega + params.h2)))
    state = init_chain(s1, decision, d0)
    domain = (model.d, model.D)

    cols = {k: np.empty(T) for k in ("s_hat_1", "s_hat_2", "order", "external_order",
                                     "omega", "loss_central", "loss_agent1", "loss_agent2",
                                     "target1", "target2")}
    epochs = []
    start = 0
    for m, length in enumerate(epoch_lengths(T, L1), start=1):
        if m > 1:
            prev = demand[start - prev_len:start]
            d_prev = d0 if start == prev_len else float(demand[start - prev_len - 1])
            omega = contract_maker(prev, params, model, delta, T, config.c1,
                                   eta=config.ogd_eta, d_prev=d_prev,
                                   gradient=config.ogd_gradient)
            s1 = agent1_level(ecdf_build(prev), params)
        eta = ons_learning_rate(omega, params, model.gamma, config.eta_rule)
        learner = lazy_ons_init(decision, eta, 1.0 / T, domain, length)

        # the supplier's reply sees only the order o_t
        def respond(o_t, _omega=omega):
            nonlocal learner
            g = agent2_subgradient(o_t, lazy_ons_point(learner), _omega, params)
            learner = lazy_ons_feed(learner, g)
            return lazy_ons_decision(learner)

        for t in range(start, start + length):
            cols["s_hat_1"][t] = state.s_hat_1
            cols["s_hat_2"][t] = state.s_hat_2
            cols["target1"][t] = s1
            state, out = step(state, s1, respond, float(demand[t]), omega, params)
            cols["target2"][t] = lazy_ons_decision(learner)
            cols["order"][t] = out.order
            cols["external_order"][t] = out.external_order
            cols["omega"][t] = omega
            cols["loss_central"][t] = out.loss_central
            cols["loss_agent1"][t] = out.loss_agent1_contract
            cols["loss_agent2"][t] = out.loss_agent2_contract
        decision = lazy_ons_decision(learner)
        epochs.append(EpochRecord(m, start, length, s1, decision, omega, learner.publishes))
        prev_len = length
        start += length

    header = {
        "mode": "decentralized",
        "T": T,
        "delta": delta,
        "c1": config.c1,
        "c3": config.c3,
        "ogd_gradient": config.ogd_gradient,
        "eta_rule": config.eta_rule,
        "L1": L1,
        "L1_formula": formula,
        "L1_deviation": f"first epoch capped at {config.l1_cap} (warm-up formula gives {formula:.4g})"
        if formula > L1 else "",
        "epoch_lengths": nominal_epoch_lengths(T, L1),
        "prior": "uniform support prior for epoch 1",
    }
    return Trace("decentralized", header, d0, demand, epochs=epochs, **cols)
