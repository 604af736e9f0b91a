"""Least-squares fits with uncertainties for the scan outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FitResult:
    """Straight-line fit with standard errors from the residual variance."""

    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    n_points: int
    masked_points: int = 0

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def fit_linear(x, y, mask=None) -> FitResult:
    """Ordinary least squares y = a x + b on the given coordinates.

    Standard errors use the unbiased residual variance with n - 2 degrees of
    freedom.  mask selects the points that participate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mask is None:
        mask = np.ones(x.shape, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
    masked = int((~mask).sum())
    x, y = x[mask], y[mask]
    n = len(x)
    if n < 2:
        raise ValueError(f"need at least 2 points to fit, have {n}")
    sxx = float(np.var(x) * n)
    if sxx == 0.0:
        raise ValueError("zero variance in x")
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    if n > 2:
        resid = y - (slope * x + intercept)
        s2 = float(np.sum(resid ** 2) / (n - 2))
        slope_err = math.sqrt(s2 / sxx)
        intercept_err = math.sqrt(s2 * (1.0 / n + xm * xm / sxx))
    else:
        slope_err = 0.0
        intercept_err = 0.0
    return FitResult(slope, float(intercept), slope_err, intercept_err, n, masked)


def fit_loglog(x, y, mask=None) -> FitResult:
    """OLS on (log10 x, log10 y); nonpositive or non-finite points are masked."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if mask is not None:
        ok &= np.asarray(mask, dtype=bool)
    result = fit_linear(np.log10(np.where(ok, x, 1.0)),
                        np.log10(np.where(ok, y, 1.0)), mask=ok)
    return FitResult(result.slope, result.intercept, result.slope_stderr,
                     result.intercept_stderr, result.n_points,
                     int(len(x) - result.n_points))
