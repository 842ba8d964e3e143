"""Expected costs of base-stock policies and the optimal levels they imply.

Notation follows the inventory literature: ``s1`` is the retailer's
order-up-to level, ``s2`` the supplier's, and demand ``X`` is drawn from a
:class:`~twoechelon.demand.DemandModel`. All functions here are pure and
deterministic; they serve as the analytic oracle for the learners.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .demand import DemandModel, cdf, cdf_integral, cdf_integral2, inverse_cdf

QUAD_TOL = 1e-10
BISECTION_TOL = 1e-8


class NumericError(ArithmeticError):
    """Integration or root finding failed."""


@dataclass(frozen=True)
class CostParams:
    """Per-unit, per-round cost coefficients.

    ``alpha`` is the retailer's share of the backorder cost; the remaining
    ``1 - alpha`` is charged to the supplier.
    """

    h1: float
    h2: float
    p1: float
    alpha: float = 1.0

    def __post_init__(self):
        vals = (self.h1, self.h2, self.p1, self.alpha)
        if not all(math.isfinite(float(v)) for v in vals):
            raise ValueError("cost parameters must be finite")
        if self.h1 < 0 or self.h2 < 0:
            raise ValueError("holding costs must be nonnegative")
        if self.p1 <= 0:
            raise ValueError("backorder cost p1 must be positive")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.h2 > self.h1:
            raise ValueError("need h2 <= h1 so the retailer quantile is at most 1")

    @property
    def critical_ratio(self) -> float:
        """Retailer quantile ``(h2 + p1) / (h1 + p1)``."""
        return (self.h2 + self.p1) / (self.h1 + self.p1)


@dataclass(frozen=True)
class OptimalLevels:
    s1_star: float
    s2_star: float
    omega_star: float
    h_star: float


# -- single-echelon newsvendor pieces -------------------------------------------

def _g_ab(a, b, y, model):
    # a * E[(y-X)^+] + b * (mu - y); every G below has this shape
    return a * cdf_integral(model, y) + b * (model.mean() - np.asarray(y, dtype=float))


def g_one(s, params: CostParams, model: DemandModel):
    """Retailer's expected cost at level ``s`` with unlimited supply."""
    a = params.h1 + params.alpha * params.p1
    return _g_ab(a, params.alpha * params.p1, s, model)


def g_two(s, params: CostParams, model: DemandModel):
    """Supplier's share of the retailer's expected backorder cost."""
    share = (1.0 - params.alpha) * params.p1
    return _g_ab(share, share, s, model)


def g_total(s, params: CostParams, model: DemandModel):
    return _g_ab(params.h1 + params.p1, params.p1, s, model)


def _g_ab_antiderivative(a, b, y, model):
    y = np.asarray(y, dtype=float)
    return a * cdf_integral2(model, y) + b * (model.mean() * y - 0.5 * y * y)


def _coupled(a, b, s1, s2, model):
    """``Phi(s2) G(s1) + int_{s2}^{D} G(s1 + s2 - x) phi(x) dx`` for ``G = G_ab``."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    head = cdf(model, s2) * _g_ab(a, b, s1, model)
    if model.kind == "uniform":
        w = model.D - model.d
        lo = np.clip(s2, model.d, model.D)
        # substitute y = s1 + s2 - x
        upper = _g_ab_antiderivative(a, b, s1 + s2 - lo, model)
        lower = _g_ab_antiderivative(a, b, s1 + s2 - model.D, model)
        return head + (upper - lower) / w
    if model.kind == "discrete":
        atoms, probs = model._atoms()
        s1b, s2b = np.broadcast_arrays(s1, s2)
        tail = np.zeros(s1b.shape)
        for atom, p in zip(atoms, probs):
            tail = tail + np.where(atom > s2b, p * _g_ab(a, b, s1b + s2b - atom, model), 0.0)
        return head + tail
    if s1.ndim or s2.ndim:
        return np.vectorize(lambda u, v: _coupled(a, b, u, v, model))(s1, s2)
    return float(head) + _quad_tail(lambda x: _g_ab(a, b, s1 + s2 - x, model), s1, s2, model)


def _quad_tail(fn, s1, s2, model):
    lo = max(float(s2), model.d)
    if lo >= model.D:
        return 0.0
    kinks = [k for k in (s1 + s2 - model.d, s1 + s2 - model.D) if lo < k < model.D]
    val, err = integrate.quad(
        lambda x: fn(x) * model.pdf(x), lo, model.D,
        points=kinks or None, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
    )
    if not math.isfinite(val) or err > 1e-7:
        raise NumericError(f"tail integral did not converge on [{lo}, {model.D}]: err={err:.3g}")
    return val


def h1_expected(s1, s2, params: CostParams, model: DemandModel):
    """Retailer's expected per-round cost under supplier-limited supply."""
    a = params.h1 + params.alpha * params.p1
    return _coupled(a, params.alpha * params.p1, s1, s2, model)


def h2_expected(s1, s2, params: CostParams, model: DemandModel):
    """Supplier's expected holding cost plus its backorder share."""
    share = (1.0 - params.alpha) * params.p1
    return params.h2 * cdf_integral(model, s2) + _coupled(share, share, s1, s2, model)


def h_expected(s1, s2, params: CostParams, model: DemandModel):
    """Expected chain cost per round of the base-stock pair ``(s1, s2)``."""
    return params.h2 * cdf_integral(model, s2) + _coupled(
        params.h1 + params.p1, params.p1, s1, s2, model
    )


def grad_h_s2(s1, s2, params: CostParams, model: DemandModel):
    """Partial derivative of :func:`h_expected` in ``s2``."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    phi2 = cdf(model, s2)
    base = params.h2 * phi2 - params.p1 * (1.0 - phi2)
    return base + (params.h1 + params.p1) * _shortfall_cdf_term(s1, s2, model)


def grad_h_s1(s1, s2, params: CostParams, model: DemandModel):
    """Partial derivative of :func:`h_expected` in ``s1``."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    hp = params.h1 + params.p1
    return hp * cdf(model, s2) * cdf(model, s1) - params.p1 + hp * _shortfall_cdf_term(s1, s2, model)


def _shortfall_cdf_term(s1, s2, model):
    # int_{s2}^{D} Phi(s1 + s2 - x) phi(x) dx
    if model.kind == "uniform":
        lo = np.clip(s2, model.d, model.D)
        w = model.D - model.d
        return (cdf_integral(model, s1 + s2 - lo) - cdf_integral(model, s1 + s2 - model.D)) / w
    if model.kind == "discrete":
        atoms, probs = model._atoms()
        s1b, s2b = np.broadcast_arrays(s1, s2)
        out = np.zeros(s1b.shape)
        for atom, p in zip(atoms, probs):
            out = out + np.where(atom > s2b, p * cdf(model, s1b + s2b - atom), 0.0)
        return out if out.ndim else float(out)
    if s1.ndim or s2.ndim:
        return np.vectorize(lambda u, v: _shortfall_cdf_term(u, v, model))(s1, s2)
    return _quad_tail(lambda x: cdf(model, s1 + s2 - x), float(s1), float(s2), model)


def augmentation_coefficient(L: int, delta: float, T: int, c1: float,
                             params: CostParams, model: DemandModel) -> float:
    """``(h1 + p1) * c1 * sqrt(log(T D / delta) / L)``."""
    if L < 1:
        raise ValueError("L must be at least 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return (params.h1 + params.p1) * c1 * math.sqrt(math.log(T * model.D / delta) / L)


def augmented_loss(s1, s2, L, delta, T, c1, params: CostParams, model: DemandModel):
    """Chain cost plus the convexifying penalty on ``int_0^{s2} Phi``."""
    coef = augmentation_coefficient(L, delta, T, c1, params, model)
    return h_expected(s1, s2, params, model) + coef * cdf_integral(model, s2)


def s1_star(params: CostParams, model: DemandModel) -> float:
    return float(inverse_cdf(model, params.critical_ratio))


def s_max(params: CostParams, model: DemandModel) -> float:
    """Upper end of the supplier's search interval."""
    if model.Gamma is None:
        raise ValueError("s_max needs a density upper bound; not available for discrete demand")
    return model.D - params.h2 / (model.Gamma * (params.h2 + params.p1))


def s2_star(params: CostParams, model: DemandModel, s1: float | None = None) -> float:
    """Root of ``grad_h_s2(s1*, .)`` by bisection on ``[0, s_max]``."""
    s1 = s1_star(params, model) if s1 is None else s1
    lo, hi = 0.0, s_max(params, model)
    g_lo = float(grad_h_s2(s1, lo, params, model))
    g_hi = float(grad_h_s2(s1, hi, params, model))
    if g_lo > 0 or g_hi < 0:
        raise NumericError(
            f"no sign change of the s2-gradient on [{lo}, {hi}] (values {g_lo:.3g}, {g_hi:.3g})"
        )
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if float(grad_h_s2(s1, mid, params, model)) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def omega_from_cdf(phi, h2: float):
    """Contract coefficient ``h2 Phi / (1 - Phi)`` for a CDF value ``Phi``."""
    return h2 * phi / (1.0 - phi)


def omega_star(params: CostParams, model: DemandModel, s2: float | None = None) -> float:
    s2 = s2_star(params, model) if s2 is None else s2
    return omega_from_cdf(float(cdf(model, s2)), params.h2)


def optimal_levels(params: CostParams, model: DemandModel) -> OptimalLevels:
    s1 = s1_star(params, model)
    s2 = s2_star(params, model, s1)
    return OptimalLevels(
        s1_star=s1,
        s2_star=s2,
        omega_star=omega_star(params, model, s2),
        h_star=float(h_expected(s1, s2, params, model)),
    )
