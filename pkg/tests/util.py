"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: the OLS
oracle uses raw normal equations with extended-precision accumulation, the
percentile oracle interpolates order statistics by hand, and the projection
oracle is plain arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

from yieldtrack.model import AnnualPoint, AnnualYieldSeries


def make_series(village_id, years, values, preliminary=None, area=2.0):
    preliminary = preliminary or [False] * len(years)
    points = tuple(
        AnnualPoint(year=y, value=float(v), preliminary=p, area=area, seasons=2)
        for y, v, p in zip(years, values, preliminary)
    )
    return AnnualYieldSeries(village_id, points)


def ols_oracle(xs, ys):
    """Normal-equation OLS with long-double accumulation.

    Returns (slope, intercept, sse) computed from the raw sums, independently
    of the centered formulation used by the library.
    """
    x = np.asarray(xs, dtype=np.longdouble)
    y = np.asarray(ys, dtype=np.longdouble)
    n = len(x)
    sx = x.sum()
    sy = y.sum()
    sxx = (x * x).sum()
    sxy = (x * y).sum()
    denom = n * sxx - sx * sx
    slope = (n * sxy - sx * sy) / denom
    intercept = (sy - slope * sx) / n
    resid = y - (intercept + slope * x)
    sse = (resid * resid).sum()
    return float(slope), float(intercept), float(sse)


def prediction_interval_oracle(xs, ys, at, t_value):
    """Closed-form prediction interval at `at` using a supplied t quantile."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    n = len(x)
    xm = x.mean()
    sxx = ((x - xm) ** 2).sum()
    slope, intercept, sse = ols_oracle(xs, ys)
    s = math.sqrt(sse / (n - 2))
    mean = intercept + slope * at
    margin = t_value * s * math.sqrt(1.0 + 1.0 / n + (at - xm) ** 2 / sxx)
    return mean - margin, mean, mean + margin


def percentile_oracle(values, q):
    """Linear interpolation between closest ranks (h = (n-1) * q / 100)."""
    ordered = sorted(values)
    n = len(ordered)
    if n == 1:
        return ordered[0]
    h = (n - 1) * q / 100.0
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return ordered[lo] + frac * (ordered[hi] - ordered[lo])


def pairwise_bounds_oracle(top, bottom):
    """Exhaustive pairwise ratios, positive denominators only."""
    pairs = [t / b for t in top for b in bottom if b > 0]
    return percentile_oracle(pairs, 2.5), percentile_oracle(pairs, 97.5)


# The worked 5-point regression used throughout: years 2019-2023, yields
# below. Slope/SSE/prediction interval were derived by hand from the normal
# equations (Sxy = 1150, Sxx = 10, SSE = 22750) and the published
# t(0.975, 3) = 3.182446305284263.
WORKED_YEARS = (2019, 2020, 2021, 2022, 2023)
WORKED_YIELDS = (1000.0, 1050.0, 1250.0, 1200.0, 1500.0)
WORKED_SLOPE = 115.0
WORKED_MEAN = 1200.0
WORKED_SSE = 22750.0
WORKED_RESID_SCALE = 87.08233651742087  # sqrt(22750 / 3)
T_975_3 = 3.182446305284263
WORKED_Y2030 = 2235.0
WORKED_Y2015 = 510.0
WORKED_MARGIN_2030 = 845.1477358287017  # t * s * sqrt(1 + 1/5 + 81/10)
WORKED_LO_2030 = 1389.8522641712984
WORKED_HI_2030 = 3080.1477358287016
