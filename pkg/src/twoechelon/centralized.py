"""Central planner with doubling epochs and the supplier's stochastic OGD."""
from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np

from . import costs
from .costs import CostParams
from .demand import DemandModel, EmpiricalCdf, ecdf_build, ecdf_inverse, sample
from .dynamics import init_chain, step
from .trace import EpochRecord, RunConfig, Trace, epoch_lengths, nominal_epoch_lengths


def agent1_level(ecdf_prev: EmpiricalCdf, params: CostParams) -> float:
    """Retailer's level: empirical quantile at ``(h2 + p1) / (h1 + p1)``."""
    return ecdf_inverse(ecdf_prev, params.critical_ratio)


def prior_model(model: DemandModel) -> DemandModel:
    """Stand-in law before any demand is observed: uniform on the support."""
    return DemandModel.uniform(model.d, model.D)


GRADIENTS = ("unbiased", "ungated")


def ogd_gradient(s1, s2, d_t, d_prev, phi_hat, coef, params: CostParams,
                 variant: str = "unbiased"):
    """Stochastic gradient of the augmented loss in ``s2``.

    ``phi_hat`` is the empirical CDF evaluated at ``s2`` and ``coef`` the
    augmentation coefficient. Works elementwise on arrays.

    The retailer's level depends on ``s2`` only when the supplier ran short
    last round (``d_prev > s2``), so the ``unbiased`` variant gates the
    retailer term on that event. ``ungated`` applies it every round, which adds
    ``Phi(s2) ((h1 + p1) Phi(s1) - p1)`` to the mean.
    """
    short = d_prev > s2
    level = np.where(short, s1 + s2 - d_prev, s1)
    retailer = (params.h1 + params.p1) * (level >= d_t) - params.p1
    if variant == "unbiased":
        retailer = retailer * short
    elif variant != "ungated":
        raise ValueError(f"gradient variant must be one of {GRADIENTS}")
    g = retailer + params.h2 * (s2 >= d_t) + coef * phi_hat
    return g if np.ndim(g) else float(g)


def default_ogd_eta(L: int, c1: float, params: CostParams, model: DemandModel) -> float:
    """``s_max / (G sqrt(L))`` with ``G`` the gradient bound."""
    G = max(params.h1, params.p1) + c1 * (params.h1 + params.p1)
    return costs.s_max(params, model) / (G * math.sqrt(L))


def agent2_ogd(samples, ecdf: EmpiricalCdf, params: CostParams, model: DemandModel,
               delta: float, T: int, c1: float, eta: float | None = None,
               d_prev: float | None = None, s_init: float | None = None,
               gradient: str = "unbiased") -> float:
    """Average iterate of projected SGD on the augmented loss.

    ``model`` only supplies the support and density bound (``D``, ``Gamma``),
    which the algorithm is assumed to know. ``d_prev`` is the demand preceding
    ``samples[0]``; by default the last sample is reused. ``gradient``
    selects the estimator, see :func:`ogd_gradient`.
    """
    demands = [float(x) for x in samples]
    L = len(demands)
    if L < 1:
        raise ValueError("need at least one demand sample")
    if gradient not in GRADIENTS:
        raise ValueError(f"gradient variant must be one of {GRADIENTS}")
    gated = gradient == "unbiased"
    top = costs.s_max(params, model)
    eta = default_ogd_eta(L, c1, params, model) if eta is None else eta
    coef = costs.augmentation_coefficient(L, delta, T, c1, params, model)
    s1 = agent1_level(ecdf, params)
    sorted_samples = ecdf.samples.tolist()
    hp, p1, h2 = params.h1 + params.p1, params.p1, params.h2

    s2 = 0.5 * (model.d + top) if s_init is None else min(max(s_init, 0.0), top)
    prev = demands[-1] if d_prev is None else float(d_prev)
    total = 0.0
    for d_t in demands:
        total += s2
        phi_hat = bisect_right(sorted_samples, s2) / L
        g = h2 * (s2 >= d_t) + coef * phi_hat
        if prev > s2:
            g += hp * (s1 + s2 - prev >= d_t) - p1
        elif not gated:
            g += hp * (s1 >= d_t) - p1
        s2 = min(top, max(0.0, s2 - eta * g))
        prev = d_t
    return total / L


def run_centralized(config: RunConfig, rng: np.random.Generator) -> Trace:
    """Play the doubling-epoch planner for ``config.T`` rounds."""
    params, model, T = config.params, config.model, config.T
    delta = config.effective_delta
    draws = sample(model, rng, T + 1)
    d0, demand = float(draws[0]), draws[1:]

    prior = costs.optimal_levels(params, prior_model(model))
    s1, s2 = prior.s1_star, min(prior.s2_star, costs.s_max(params, model))
    state = init_chain(s1, s2, d0)

    cols = {k: np.empty(T) for k in ("s_hat_1", "s_hat_2", "order", "external_order",
                                     "loss_central", "loss_agent1", "loss_agent2",
                                     "target1", "target2")}
    epochs = []
    start = 0
    for m, length in enumerate(epoch_lengths(T, 1), start=1):
        for t in range(start, start + length):
            cols["s_hat_1"][t] = state.s_hat_1
            cols["s_hat_2"][t] = state.s_hat_2
            cols["target1"][t] = s1
            cols["target2"][t] = s2
            state, out = step(state, s1, s2, float(demand[t]), 0.0, params)
            cols["order"][t] = out.order
            cols["external_order"][t] = out.external_order
            cols["loss_central"][t] = out.loss_central
            cols["loss_agent1"][t] = out.loss_agent1_contract
            cols["loss_agent2"][t] = out.loss_agent2_contract
        epochs.append(EpochRecord(m, start, length, s1, s2, 0.0))
        batch = demand[start:start + length]
        ecdf = ecdf_build(batch)
        d_prev = d0 if start == 0 else float(demand[start - 1])
        s1 = agent1_level(ecdf, params)
        s2 = agent2_ogd(batch, ecdf, params, model, delta, T, config.c1,
                        eta=config.ogd_eta, d_prev=d_prev, s_init=s2,
                        gradient=config.ogd_gradient)
        start += length

    header = {
        "mode": "centralized",
        "T": T,
        "delta": delta,
        "c1": config.c1,
        "ogd_gradient": config.ogd_gradient,
        "epoch_lengths": nominal_epoch_lengths(T, 1),
        "prior": "uniform support prior for epoch 1",
    }
    return Trace("centralized", header, d0, demand, omega=np.zeros(T), epochs=epochs, **cols)
