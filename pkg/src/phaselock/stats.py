"""Aggregation statistics and log-log power-law regression."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class FitResult:
    """Ordinary least squares in (ln x, ln y); intercept is in natural log."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def ols_loglog(x, y) -> FitResult:
    """OLS fit of ln y against ln x.

    Requires strictly positive coordinates and at least two distinct x
    values. A constant y comes back as slope 0 with r_squared 1 (the fit
    reproduces the data exactly).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be equal-length 1-d arrays, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires strictly positive coordinates")
    lx = np.log(x)
    ly = np.log(y)
    if np.ptp(lx) == 0.0:
        raise ValueError("need at least two distinct x values")
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    slope = float(dx @ dy) / float(dx @ dx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = dy - slope * dx
    ss_res = float(resid @ resid)
    ss_tot = float(dy @ dy)
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        r_squared = float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
    return FitResult(slope=slope, intercept=intercept, r_squared=r_squared, n_points=x.size)


def mean_stderr(samples) -> tuple[float, float]:
    """Arithmetic mean and its standard error s/sqrt(n) (ddof=1; 0.0 for a
    single sample)."""
    a = np.asarray(samples, dtype=float)
    if a.size == 0:
        raise ValueError("need at least one sample")
    if a.size == 1:
        return float(a[0]), 0.0
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(a.size))


def rmse(errors) -> float:
    """Root mean square of the entries."""
    a = np.asarray(errors, dtype=float)
    if a.size == 0:
        raise ValueError("need at least one sample")
    return float(np.sqrt(np.mean(a * a)))


def rmse_stderr(errors) -> float:
    """Delta-method standard error of :func:`rmse` (0.0 when the rmse is 0)."""
    a = np.asarray(errors, dtype=float)
    if a.size == 0:
        raise ValueError("need at least one sample")
    root = rmse(a)
    if root == 0.0 or a.size == 1:
        return 0.0
    sq = a * a
    se_sq = sq.std(ddof=1) / np.sqrt(sq.size)
    return float(se_sq / (2.0 * root))
