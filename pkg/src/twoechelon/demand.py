"""Bounded demand distributions and the empirical CDF estimator.

Every learner in the package sees demand through two objects: a
:class:`DemandModel` (the ground-truth law, used for sampling and by the
analytic oracles) and an :class:`EmpiricalCdf` built from observed samples.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import special

KINDS = ("uniform", "truncated-gaussian", "truncated-exponential", "discrete")

# Rejection sampling gives up after this many rounds of proposals.
MAX_REJECTION_ROUNDS = 1000


class DemandError(ValueError):
    """Invalid demand specification or sampling failure."""


@dataclass(frozen=True)
class DemandModel:
    """Demand law supported on ``[d, D]``.

    Truncated kinds are the base law restricted to ``[d, D]`` and renormalised;
    ``gamma``/``Gamma`` are the min/max of that renormalised density. For the
    ``discrete`` kind both bounds are ``None``.
    """

    kind: str
    d: float
    D: float
    params: tuple = ()
    gamma: float | None = field(default=None, compare=False)
    Gamma: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DemandError(f"unknown demand kind {self.kind!r}")
        if not (0 < self.d < self.D):
            raise DemandError(f"need 0 < d < D, got d={self.d}, D={self.D}")
        if self.kind == "discrete":
            atoms, probs = self._atoms()
            if np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-9:
                raise DemandError("discrete probabilities must be positive and sum to 1")
            if atoms[0] < self.d or atoms[-1] > self.D:
                raise DemandError("discrete atoms must lie in [d, D]")
            return
        lo, hi = self._density_bounds()
        object.__setattr__(self, "gamma", lo)
        object.__setattr__(self, "Gamma", hi)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def uniform(cls, d: float, D: float) -> DemandModel:
        return cls("uniform", float(d), float(D))

    @classmethod
    def truncated_gaussian(cls, mean: float, std: float, d: float, D: float) -> DemandModel:
        if std <= 0:
            raise DemandError("std must be positive")
        return cls("truncated-gaussian", float(d), float(D), (float(mean), float(std)))

    @classmethod
    def truncated_exponential(cls, mean: float, d: float, D: float) -> DemandModel:
        if mean <= 0:
            raise DemandError("mean must be positive")
        return cls("truncated-exponential", float(d), float(D), (float(mean),))

    @classmethod
    def discrete(cls, atoms, probs) -> DemandModel:
        pairs = sorted(zip(map(float, atoms), map(float, probs)))
        if not pairs:
            raise DemandError("discrete law needs at least one atom")
        xs = tuple(a for a, _ in pairs)
        if len(set(xs)) != len(xs):
            raise DemandError("duplicate atoms")
        lo, hi = xs[0], xs[-1]
        # a point mass still needs d < D; pad the nominal support
        if hi == lo:
            lo, hi = lo * 0.5, lo * 1.5
        return cls("discrete", lo, hi, tuple(pairs))

    # -- internals ------------------------------------------------------------

    def _atoms(self):
        atoms = np.array([a for a, _ in self.params], dtype=float)
        probs = np.array([p for _, p in self.params], dtype=float)
        return atoms, probs

    def _base_cdf(self, x):
        if self.kind == "truncated-gaussian":
            mean, std = self.params
            return special.ndtr((np.asarray(x, dtype=float) - mean) / std)
        (mean,) = self.params
        return -np.expm1(-np.maximum(x, 0.0) / mean)

    def _base_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "truncated-gaussian":
            mean, std = self.params
            return np.exp(-0.5 * ((x - mean) / std) ** 2) / (std * math.sqrt(2 * math.pi))
        (mean,) = self.params
        return np.where(x >= 0, np.exp(-x / mean) / mean, 0.0)

    def _base_ppf(self, q):
        if self.kind == "truncated-gaussian":
            mean, std = self.params
            return mean + std * special.ndtri(q)
        (mean,) = self.params
        return -mean * np.log1p(-q)

    def _mass(self):
        cached = self.__dict__.get("_mass_cache")
        if cached is None:
            lo = float(self._base_cdf(self.d))
            cached = (lo, float(self._base_cdf(self.D)) - lo)
            object.__setattr__(self, "_mass_cache", cached)
        return cached

    def _density_bounds(self):
        if self.kind == "uniform":
            v = 1.0 / (self.D - self.d)
            return v, v
        _, z = self._mass()
        if z <= 0:
            raise DemandError("base distribution puts no mass on [d, D]")
        if self.kind == "truncated-gaussian":
            mean, _ = self.params
            peak = min(max(mean, self.d), self.D)
            far = self.d if abs(self.d - mean) >= abs(self.D - mean) else self.D
            return float(self._base_pdf(far) / z), float(self._base_pdf(peak) / z)
        # exponential density is decreasing on [d, D]
        return float(self._base_pdf(self.D) / z), float(self._base_pdf(self.d) / z)

    @property
    def is_continuous(self) -> bool:
        return self.kind != "discrete"

    def pdf(self, x):
        """Density on ``[d, D]`` (zero outside). Not defined for discrete laws."""
        if not self.is_continuous:
            raise DemandError("discrete law has no density")
        x = np.asarray(x, dtype=float)
        inside = (x >= self.d) & (x <= self.D)
        if self.kind == "uniform":
            out = np.where(inside, 1.0 / (self.D - self.d), 0.0)
        else:
            _, z = self._mass()
            out = np.where(inside, self._base_pdf(x) / z, 0.0)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        cached = self.__dict__.get("_mean_cache")
        if cached is not None:
            return cached
        if self.kind == "uniform":
            cached = 0.5 * (self.d + self.D)
        elif self.kind == "discrete":
            atoms, probs = self._atoms()
            cached = float(atoms @ probs)
        else:
            # E[X] = D - int_d^D Phi
            cached = self.D - float(cdf_integral(self, self.D))
        object.__setattr__(self, "_mean_cache", cached)
        return cached


def cdf(model: DemandModel, x):
    """``P(demand <= x)``; 0 below ``d`` and 1 from ``D`` on."""
    x = np.asarray(x, dtype=float)
    if model.kind == "uniform":
        out = np.clip((x - model.d) / (model.D - model.d), 0.0, 1.0)
    elif model.kind == "discrete":
        atoms, probs = model._atoms()
        cum = np.concatenate(([0.0], np.cumsum(probs)))
        cum[-1] = 1.0
        out = cum[np.searchsorted(atoms, x, side="right")]
    else:
        lo, z = model._mass()
        out = np.clip((model._base_cdf(x) - lo) / z, 0.0, 1.0)
        out = np.where(x >= model.D, 1.0, np.where(x <= model.d, 0.0, out))
    return out if out.ndim else float(out)


def inverse_cdf(model: DemandModel, kappa):
    """Smallest ``x`` in ``[d, D]`` with ``cdf(x) >= kappa``."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any((kappa < 0) | (kappa > 1)):
        raise DemandError("kappa must lie in [0, 1]")
    if model.kind == "uniform":
        out = model.d + kappa * (model.D - model.d)
    elif model.kind == "discrete":
        atoms, probs = model._atoms()
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, kappa - 1e-12, side="left")
        out = atoms[np.minimum(idx, len(atoms) - 1)]
    else:
        lo, z = model._mass()
        out = model._base_ppf(lo + kappa * z)
    out = np.clip(out, model.d, model.D)
    if model.is_continuous:
        out = np.where(kappa <= 0, model.d, np.where(kappa >= 1, model.D, out))
    return out if out.ndim else float(out)


def _base_cdf_antiderivatives(model, u):
    """First and second antiderivatives of the untruncated base CDF."""
    if model.kind == "truncated-gaussian":
        m, sd = model.params
        F = model._base_cdf(u)
        f = model._base_pdf(u)
        a1 = (u - m) * F + sd * sd * f
        a2 = 0.5 * ((u - m) ** 2 + sd * sd) * F + 0.5 * sd * sd * (u - m) * f
        return a1, a2
    (theta,) = model.params
    u = np.maximum(u, 0.0)
    e = np.exp(-u / theta)
    a1 = u - theta * (1.0 - e)
    a2 = 0.5 * u * u - theta * u + theta * theta * (1.0 - e)
    return a1, a2


def cdf_integral(model: DemandModel, y):
    """``E[(y - X)^+]``, i.e. the integral of the CDF up to ``y``."""
    y = np.asarray(y, dtype=float)
    if model.kind == "discrete":
        atoms, probs = model._atoms()
        out = np.maximum(y[..., None] - atoms, 0.0) @ probs
    elif model.kind == "uniform":
        w = model.D - model.d
        yc = np.clip(y, model.d, model.D)
        out = (yc - model.d) ** 2 / (2 * w) + np.maximum(y - model.D, 0.0)
    else:
        lo, z = model._mass()
        yc = np.clip(y, model.d, model.D)
        a_y, _ = _base_cdf_antiderivatives(model, yc)
        a_d, _ = _base_cdf_antiderivatives(model, model.d)
        out = (a_y - a_d - lo * (yc - model.d)) / z + np.maximum(y - model.D, 0.0)
    return out if out.ndim else float(out)


def cdf_integral2(model: DemandModel, y):
    """``E[((y - X)^+)^2] / 2``, the antiderivative of :func:`cdf_integral`."""
    y = np.asarray(y, dtype=float)
    if model.kind == "discrete":
        atoms, probs = model._atoms()
        out = 0.5 * np.maximum(y[..., None] - atoms, 0.0) ** 2 @ probs
    else:
        yc = np.clip(y, model.d, model.D)
        over = np.maximum(y - model.D, 0.0)
        top = cdf_integral(model, model.D)
        if model.kind == "uniform":
            inner = (yc - model.d) ** 3 / (6 * (model.D - model.d))
        else:
            lo, z = model._mass()
            _, b_y = _base_cdf_antiderivatives(model, yc)
            a_d, b_d = _base_cdf_antiderivatives(model, model.d)
            dy = yc - model.d
            inner = (b_y - b_d - a_d * dy - 0.5 * lo * dy * dy) / z
        out = inner + top * over + 0.5 * over * over
    return out if out.ndim else float(out)


def sample(model: DemandModel, rng: np.random.Generator, size: int | None = None):
    """Draw demand(s). Truncated kinds use rejection from the base law."""
    n = 1 if size is None else int(size)
    if model.kind == "uniform":
        out = rng.uniform(model.d, model.D, n)
    elif model.kind == "discrete":
        atoms, probs = model._atoms()
        out = atoms[rng.choice(len(atoms), size=n, p=probs)]
    else:
        out = _rejection(model, rng, n)
    return float(out[0]) if size is None else out


def _rejection(model, rng, n):
    _, z = model._mass()
    kept = []
    need = n
    for _ in range(MAX_REJECTION_ROUNDS):
        batch = max(16, int(need / z * 1.2) + 8)
        if model.kind == "truncated-gaussian":
            mean, std = model.params
            draw = rng.normal(mean, std, batch)
        else:
            draw = rng.exponential(model.params[0], batch)
        draw = draw[(draw >= model.d) & (draw <= model.D)]
        kept.append(draw[:need])
        need -= len(kept[-1])
        if need == 0:
            return np.concatenate(kept)
    raise DemandError("rejection sampler exhausted its retry cap; check the support")


_SPEC_RE = re.compile(r"^\s*([a-z\-]+)\s*\((.*)\)\s*$")


def parse_demand(text: str) -> DemandModel:
    """Parse a compact demand spec.

    Accepted forms::

        uniform(1, 4)
        gaussian(3, 1, 1, 4)          # mean, std, d, D
        exponential(3, 1, 4)          # mean, d, D
        discrete(1:0.2, 2:0.3, 4:0.5) # atom:prob pairs
    """
    m = _SPEC_RE.match(text)
    if not m:
        raise DemandError(f"cannot parse demand spec {text!r}")
    kind, body = m.group(1), m.group(2)
    parts = [p.strip() for p in body.split(",") if p.strip()]
    try:
        if kind == "uniform":
            return DemandModel.uniform(*map(float, parts))
        if kind in ("gaussian", "truncated-gaussian"):
            return DemandModel.truncated_gaussian(*map(float, parts))
        if kind in ("exponential", "truncated-exponential"):
            return DemandModel.truncated_exponential(*map(float, parts))
        if kind == "discrete":
            pairs = [tuple(map(float, p.split(":"))) for p in parts]
            return DemandModel.discrete([a for a, _ in pairs], [w for _, w in pairs])
    except TypeError as exc:
        raise DemandError(f"wrong number of parameters in {text!r}") from exc
    except DemandError:
        raise
    except ValueError as exc:
        raise DemandError(f"non-numeric parameter in {text!r}") from exc
    raise DemandError(f"unknown demand kind {kind!r}")


def format_demand(model: DemandModel) -> str:
    """Inverse of :func:`parse_demand`."""
    if model.kind == "uniform":
        return f"uniform({model.d!r}, {model.D!r})"
    if model.kind == "truncated-gaussian":
        return "gaussian({!r}, {!r}, {!r}, {!r})".format(*model.params, model.d, model.D)
    if model.kind == "truncated-exponential":
        return "exponential({!r}, {!r}, {!r})".format(model.params[0], model.d, model.D)
    return "discrete(" + ", ".join(f"{a!r}:{p!r}" for a, p in model.params) + ")"


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step CDF of a finite sample."""

    samples: np.ndarray

    @property
    def L(self) -> int:
        return len(self.samples)

    def __call__(self, x):
        return ecdf_eval(self, x)


def ecdf_build(samples) -> EmpiricalCdf:
    arr = np.sort(np.asarray(samples, dtype=float).ravel())
    if arr.size == 0:
        raise DemandError("empirical CDF needs at least one sample")
    arr.setflags(write=False)
    return EmpiricalCdf(arr)


def ecdf_eval(ecdf: EmpiricalCdf, x):
    """Fraction of samples ``<= x``."""
    counts = np.searchsorted(ecdf.samples, x, side="right")
    return counts / ecdf.L


def ecdf_inverse(ecdf: EmpiricalCdf, kappa: float) -> float:
    """Smallest sample ``z`` with ``ecdf(z) >= kappa``."""
    if not 0 <= kappa <= 1:
        raise DemandError("kappa must lie in [0, 1]")
    # slack absorbs round-off in kappa * L for rational kappa
    need = math.ceil(kappa * ecdf.L - 1e-9)
    return float(ecdf.samples[min(max(need, 1), ecdf.L) - 1])
