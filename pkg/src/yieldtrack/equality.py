"""Producer-inequality diagnostics over fixed yield-decile cohorts.

Villages are ranked by yield in a cohort year (2019 by default), split into
ten contiguous rank groups, and the groups are followed through later years
without reshuffling. Inequality is the ratio of the top cohort's mean yield
to the bottom cohort's, bounded by the 2.5th/97.5th percentiles of all
pairwise top/bottom yield ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EvaluationError
from .model import AnnualTable

TOP_DECILE = 10
BOTTOM_DECILE = 1


def exact_mean(values: Sequence[float]) -> float:
    """Mean with an identical-value fast path.

    When every entry equals the first, the mean is returned exactly (no
    summation round-off); equality ratios over a common projection target
    therefore come out exactly 1.0.
    """
    if len(values) == 0:
        raise EvaluationError("mean of empty sequence")
    first = float(values[0])
    for v in values:
        if v != first:
            return math.fsum(values) / len(values)
    return first


@dataclass(frozen=True)
class CohortAssignment:
    """Fixed decile membership keyed on the cohort year; decile 10 is highest."""

    cohort_year: int
    deciles: Mapping[str, int]

    def members(self, decile: int) -> tuple[str, ...]:
        if not 1 <= decile <= 10:
            raise ValueError(f"decile must be 1..10, got {decile}")
        return tuple(sorted(v for v, d in self.deciles.items() if d == decile))

    def sizes(self) -> dict[int, int]:
        out = {d: 0 for d in range(1, 11)}
        for d in self.deciles.values():
            out[d] += 1
        return out


def assign_cohorts(values: Mapping[str, float], cohort_year: int) -> CohortAssignment:
    """Split villages with data in the cohort year into ten rank groups.

    Ranking is by yield ascending with village-id tie-break; group sizes
    differ by at most one. Requires at least 10 villages.
    """
    if len(values) < 10:
        raise EvaluationError(
            f"cohort assignment needs >= 10 villages with data in {cohort_year}, "
            f"got {len(values)}"
        )
    ranked = sorted(values.items(), key=lambda kv: (kv[1], kv[0]))
    n = len(ranked)
    deciles: dict[str, int] = {}
    for d in range(10):
        lo = (d * n) // 10
        hi = ((d + 1) * n) // 10
        for vid, _ in ranked[lo:hi]:
            deciles[vid] = d + 1
    return CohortAssignment(cohort_year, deciles)


@dataclass(frozen=True, slots=True)
class CohortCell:
    year: int
    decile: int
    mean_yield: float
    members_present: int
    members_missing: int
    preliminary: bool


@dataclass
class CohortSeries:
    """Per-(decile, year) cohort means; cells with no members are flagged."""

    cohort_year: int
    cells: list[CohortCell] = field(default_factory=list)
    missing_cells: list[tuple[int, int]] = field(default_factory=list)  # (year, decile)

    def cell(self, year: int, decile: int) -> CohortCell | None:
        for c in self.cells:
            if c.year == year and c.decile == decile:
                return c
        return None


def cohort_mean_series(assignment: CohortAssignment, table: AnnualTable,
                       years: Sequence[int]) -> CohortSeries:
    """Mean yield of each decile cohort in each requested year.

    Membership is frozen at the cohort year; members missing a year are
    dropped from that year's mean and counted. A cell is preliminary when any
    contributing point is.
    """
    series = CohortSeries(cohort_year=assignment.cohort_year)
    for year in years:
        for decile in range(1, 11):
            members = assignment.members(decile)
            values: list[float] = []
            preliminary = False
            missing = 0
            for vid in members:
                point = table.get(vid).point_at(year) if vid in table else None
                if point is None:
                    missing += 1
                    continue
                values.append(point.value)
                preliminary = preliminary or point.preliminary
            if not values:
                series.missing_cells.append((year, decile))
                continue
            series.cells.append(
                CohortCell(
                    year=year,
                    decile=decile,
                    mean_yield=exact_mean(values),
                    members_present=len(values),
                    members_missing=missing,
                    preliminary=preliminary,
                )
            )
    return series


@dataclass(frozen=True, slots=True)
class InequalityReport:
    """Top/bottom cohort mean ratio with pairwise percentile bounds."""

    year: int
    top_mean: float
    bottom_mean: float
    ratio: float
    bounds: tuple[float, float]
    excluded_pairs: int = 0
    preliminary: bool = False


def inequality_ratio(top: Sequence[float], bottom: Sequence[float], year: int,
                     preliminary: bool = False) -> InequalityReport:
    """Inequality ratio between top and bottom cohort yields in one year.

    The ratio divides cohort means; the bounds are the 2.5th and 97.5th
    percentiles (linear interpolation between closest ranks) of every
    pairwise top/bottom ratio. Pairs with a non-positive bottom yield are
    excluded and counted; if all pairs are excluded the ratio is undefined.
    """
    if len(top) == 0 or len(bottom) == 0:
        raise EvaluationError(f"empty cohort in {year}")
    top_mean = exact_mean(top)
    bottom_mean = exact_mean(bottom)
    ratio = top_mean / bottom_mean if bottom_mean != 0.0 else math.inf
    top_arr = np.asarray(top, dtype=np.float64)
    bottom_arr = np.asarray(bottom, dtype=np.float64)
    positive = bottom_arr > 0.0
    excluded = int((~positive).sum()) * top_arr.size
    if not positive.any():
        raise EvaluationError(
            f"all pairwise comparisons excluded in {year}: "
            "no positive bottom-cohort yields"
        )
    pairs = (top_arr[:, None] / bottom_arr[None, positive.nonzero()[0]]).ravel()
    if pairs.size and np.all(pairs == pairs[0]):
        lo = hi = float(pairs[0])
    else:
        lo, hi = (float(q) for q in np.percentile(pairs, [2.5, 97.5]))
    return InequalityReport(
        year=year,
        top_mean=top_mean,
        bottom_mean=bottom_mean,
        ratio=ratio,
        bounds=(lo, hi),
        excluded_pairs=excluded,
        preliminary=preliminary,
    )


def inequality_series(assignment: CohortAssignment, table: AnnualTable,
                      years: Sequence[int]) -> list[InequalityReport]:
    """Inequality ratio per year between decile-10 and decile-1 cohorts."""
    reports = []
    for year in years:
        top_vals, top_prelim = _cohort_values(assignment, table, TOP_DECILE, year)
        bottom_vals, bottom_prelim = _cohort_values(assignment, table, BOTTOM_DECILE, year)
        if not top_vals or not bottom_vals:
            continue
        reports.append(
            inequality_ratio(
                top_vals, bottom_vals, year, preliminary=top_prelim or bottom_prelim
            )
        )
    return reports


def _cohort_values(assignment, table, decile, year):
    values: list[float] = []
    preliminary = False
    for vid in assignment.members(decile):
        point = table.get(vid).point_at(year) if vid in table else None
        if point is not None:
            values.append(point.value)
            preliminary = preliminary or point.preliminary
    return values, preliminary


def format_ratio(ratio: float, decimals: int = 1) -> str:
    """Display form of a ratio (e.g. 2.3672 -> "2.4")."""
    if math.isinf(ratio):
        return "inf"
    return f"{ratio:.{decimals}f}"
