"""Independent reference computations used only by the tests.

Nothing here imports the package's numerical code: densities are written
out with :mod:`math`, integrals use a plain composite Simpson rule, and
minimizers are brute-force grids. Agreement with the package therefore
checks two separate derivations against each other.
"""
from __future__ import annotations

import math

import numpy as np


def simpson(f, a: float, b: float, n: int = 4000) -> float:
    """Composite Simpson rule with ``n`` (even) panels; ``f`` is vectorized."""
    if b <= a:
        return 0.0
    n += n % 2
    x = np.linspace(a, b, n + 1)
    y = f(x)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (3 * n) * np.dot(w, y))


def simpson_pieces(f, a, b, cuts=(), n=4000) -> float:
    """Simpson on ``[a, b]`` split at the ``cuts`` lying inside (kinks of ``f``)."""
    pts = sorted({a, b, *(c for c in cuts if a < c < b)})
    return sum(simpson(f, lo, hi, n) for lo, hi in zip(pts[:-1], pts[1:]))


class RefLaw:
    """A continuous demand law on ``[d, D]`` given by an unnormalized density."""

    def __init__(self, raw_pdf, d, D):
        self.d, self.D = float(d), float(D)
        self._raw = raw_pdf
        self.mass = simpson(raw_pdf, d, D, 20000)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.d) & (x <= self.D)
        return np.where(inside, self._raw(np.clip(x, self.d, self.D)) / self.mass, 0.0)

    def cdf(self, x):
        x = float(x)
        if x <= self.d:
            return 0.0
        if x >= self.D:
            return 1.0
        return simpson(self.pdf, self.d, x, 4000)

    def mean(self):
        return simpson(lambda x: x * self.pdf(x), self.d, self.D, 20000)

    def expect(self, g, cuts=()):
        return simpson_pieces(lambda x: g(x) * self.pdf(x), self.d, self.D, cuts, 4000)


def ref_uniform(d=1.0, D=4.0):
    return RefLaw(lambda x: np.ones_like(x), d, D)


def ref_gaussian(mu=3.0, sd=1.0, d=1.0, D=4.0):
    return RefLaw(lambda x: np.exp(-0.5 * ((x - mu) / sd) ** 2), d, D)


def ref_exponential(mean=3.0, d=1.0, D=4.0):
    return RefLaw(lambda x: np.exp(-x / mean), d, D)


def ref_g(y, h1, p1, law):
    """Newsvendor cost ``h1 E[(y - X)^+] + p1 E[(X - y)^+]``."""
    return law.expect(lambda x: h1 * np.maximum(y - x, 0.0) + p1 * np.maximum(x - y, 0.0), cuts=(y,))


def ref_h(s1, s2, h1, h2, p1, law):
    """Chain cost written straight from the stationary two-demand picture.

    With probability ``Phi(s2)`` the supplier covered last round's order and
    the retailer starts at ``s1``; otherwise it starts at ``s1 + s2 - x``
    where ``x`` is last round's demand.
    """
    hold2 = law.expect(lambda x: h2 * np.maximum(s2 - x, 0.0), cuts=(s2,))
    head = law.cdf(s2) * ref_g(s1, h1, p1, law)
    lo = max(s2, law.d)
    tail = 0.0
    if lo < law.D:
        xs = np.linspace(lo, law.D, 401)
        vals = np.array([ref_g(s1 + s2 - x, h1, p1, law) for x in xs]) * law.pdf(xs)
        w = np.ones(401)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        tail = float((law.D - lo) / (3 * 400) * np.dot(w, vals))
    return hold2 + head + tail


def uniform_h_closed(s1, s2, h1, h2, p1, d=1.0, D=4.0):
    """Vectorized chain cost for uniform demand, re-derived by hand.

    ``P(y) = E[(y - X)^+]`` and ``Q(y) = E[((y - X)^+)^2] / 2`` are piecewise
    polynomials; the tail integral substitutes ``y = s1 + s2 - x``.
    """
    w = D - d
    mu = 0.5 * (d + D)

    def P(y):
        y = np.clip(y, d, None)
        inside = np.minimum(y, D)
        return (inside - d) ** 2 / (2 * w) + np.maximum(y - D, 0.0)

    def Qfull(y):
        # above D every x contributes, so Q(y) = (Var X + (y - mu)^2) / 2
        y = np.asarray(y, dtype=float)
        below = np.clip(y, d, D)
        val = (below - d) ** 3 / (6 * w)
        full = ((y - mu) ** 2 + w * w / 12.0) / 2.0
        return np.where(y > D, full, val)

    def G(y):
        return (h1 + p1) * P(y) + p1 * (mu - y)

    def Gint(y):
        return (h1 + p1) * Qfull(y) + p1 * (mu * y - 0.5 * y * y)

    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    phi2 = np.clip((s2 - d) / w, 0.0, 1.0)
    lo = np.clip(s2, d, D)
    tail = (Gint(s1 + s2 - lo) - Gint(s1 + s2 - D)) / w
    return h2 * P(s2) + phi2 * G(s1) + tail


def pinball(s, z, over, under):
    g = s - z
    return over * np.maximum(g, 0.0) + under * np.maximum(-g, 0.0)


def two_pass_mean_std(rows):
    a = np.asarray(rows, dtype=float)
    return a.mean(axis=0), a.std(axis=0, ddof=1)
