"""Power-law exponent fits in two parameters (mu, h)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

MIN_DISTINCT = 4


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit ``log N = a log mu + b log h + c``."""

    slopes: tuple
    intercept: float
    r2: float
    residual_max: float
    predicted: tuple | None = None
    band: float = 0.1

    @property
    def deviations(self):
        if self.predicted is None:
            return None
        return tuple(abs(s - p) for s, p in zip(self.slopes, self.predicted))

    @property
    def verdict(self):
        if self.predicted is None:
            return None
        return "pass" if all(dv <= self.band for dv in self.deviations) else "fail"

    def to_json(self):
        return {
            "mu_slope": self.slopes[0], "h_slope": self.slopes[1], "intercept": self.intercept,
            "r2": self.r2, "residual_max": self.residual_max,
            "predicted": None if self.predicted is None else list(self.predicted),
            "band": self.band, "verdict": self.verdict,
        }


def _prediction_pair(prediction):
    if prediction is None:
        return None
    if hasattr(prediction, "single_term"):
        t = prediction.single_term
        if t.log:
            raise DomainError("logarithmic predictions cannot be compared by a power fit")
        return float(t.mu_power), float(t.h_power)
    a, b = prediction
    return float(a), float(b)


def exponent_fit(mu, h, values, prediction=None, band=0.1) -> FitResult:
    """Fit ``values ~ C mu^a h^b`` by ordinary least squares in log space.

    Each of ``mu`` and ``h`` needs at least four distinct values, and the
    two must not be collinear in log space.  ``prediction`` is an
    ``ExponentPrediction`` (single-term rows only) or a pair ``(a, b)``.
    """
    mu = np.asarray(mu, float).ravel()
    h = np.asarray(h, float).ravel()
    v = np.asarray(values, float).ravel()
    if not (mu.size == h.size == v.size):
        raise ValueError("mu, h and values must have the same length")
    if np.any(v <= 0) or np.any(mu <= 0) or np.any(h <= 0):
        raise DomainError("exponent fits need positive parameters and values")
    for name, arr in (("mu", mu), ("h", h)):
        if np.unique(arr).size < MIN_DISTINCT:
            raise DomainError(f"{name} ladder has fewer than {MIN_DISTINCT} distinct values")
    X = np.column_stack([np.log(mu), np.log(h), np.ones(mu.size)])
    if np.linalg.matrix_rank(X) < 3:
        raise DomainError("log mu and log h are collinear on this ladder")
    y = np.log(v)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(res @ res) / ss if ss > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return FitResult((float(coef[0]), float(coef[1])), float(coef[2]), r2,
                     float(np.max(np.abs(res))), _prediction_pair(prediction), band)
