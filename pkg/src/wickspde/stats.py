"""Small statistics helpers: Wilson intervals, weighted line fits, running moments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps


def wilson_interval(successes, trials, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion (vectorised)."""
    k = np.asarray(successes, dtype=float)
    n = np.asarray(trials, dtype=float)
    z = sps.norm.ppf(0.5 + confidence / 2.0)
    p = np.where(n > 0, k / np.maximum(n, 1), 0.0)
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    x_range: tuple

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "x_range": list(self.x_range),
        }


def weighted_line_fit(x, y, weights=None) -> LineFit | None:
    """Weighted least-squares line y = slope x + intercept with weighted R^2.

    Returns None with fewer than three points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y) & np.isfinite(w) & (w > 0)
    x, y, w = x[ok], y[ok], w[ok]
    if x.size < 3:
        return None
    X = np.column_stack([x, np.ones_like(x)])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    resid = y - X @ coef
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    ss_res = float(np.sum(w * resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LineFit(float(coef[0]), float(coef[1]), r2, int(x.size), (float(x.min()), float(x.max())))


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass
class RunningMoments:
    """Mergeable sufficient statistics (count, sum, sum of squares)."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, values) -> "RunningMoments":
        v = np.asarray(values, dtype=float).ravel()
        self.count += v.size
        self.total += float(v.sum())
        self.total_sq += float(np.dot(v, v))
        return self

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        return RunningMoments(self.count + other.count, self.total + other.total,
                              self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        return max(0.0, (self.total_sq - self.total**2 / self.count) / (self.count - 1))

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count)
