"""Small numeric helpers for aggregating trials."""
from __future__ import annotations

import math

import numpy as np


class Welford:
    """One-pass running mean and sample standard deviation.

    Works elementwise when fed equally shaped arrays.
    """

    def __init__(self):
        self.n = 0
        self._mean = None
        self._m2 = None

    def push(self, x) -> None:
        x = np.asarray(x, dtype=float)
        self.n += 1
        if self._mean is None:
            self._mean = x.copy()
            self._m2 = np.zeros_like(x)
            return
        delta = x - self._mean
        self._mean = self._mean + delta / self.n
        self._m2 = self._m2 + delta * (x - self._mean)

    @property
    def mean(self):
        if self.n == 0:
            raise ValueError("no observations")
        return self._mean

    @property
    def std(self):
        """Sample standard deviation (``ddof=1``); zero for a single observation."""
        if self.n == 0:
            raise ValueError("no observations")
        if self.n == 1:
            return np.zeros_like(self._m2)
        return np.sqrt(self._m2 / (self.n - 1))


def fit_growth(points) -> float:
    """Least-squares slope of ``log(value)`` against ``log(t)``.

    Parameters
    ----------
    points : iterable of (t, value)
        At least three checkpoints with positive ``t`` and ``value``.

    Returns
    -------
    float
        The fitted exponent ``a`` in ``value ~ t**a``.
    """
    pts = [(float(t), float(v)) for t, v in points]
    if len(pts) < 3:
        raise ValueError("need at least three checkpoints")
    if any(not (t > 0 and v > 0) or not math.isfinite(v) for t, v in pts):
        raise ValueError("growth fit needs positive finite t and values")
    x = np.log([t for t, _ in pts])
    y = np.log([v for _, v in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
