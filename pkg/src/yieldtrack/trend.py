"""Per-village linear yield trends with prediction bands and track status.

Each village gets an ordinary-least-squares fit of annual yield on calendar
year over an observation window. Projections extrapolate the fit to any year;
lower/upper bands are 95% prediction intervals for a new observation, which
widen away from the window center. A village is on track for SDG 2.3 when its
projected end-year yield is at least twice its projected baseline-year yield.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import DataError, DegenerateModelError, EvaluationError
from .model import AnnualTable, AnnualYieldSeries
from .stats import student_t_quantile

DEFAULT_WINDOW = (2019, 2023)
DEFAULT_CONFIDENCE = 0.95

# Floor for backcast denominators: steep positive trends can project a
# non-positive baseline yield, which would make doubling ratios blow up or
# flip sign. Such villages are clamped to 1 kg/ha and flagged.
BASELINE_FLOOR = 1.0

# Slack on the ratio >= 2 comparison so that villages scheduled to land
# exactly on a doubling target are not lost to float round-trips.
ON_TRACK_SLACK = 1e-9


class Band(str, Enum):
    MEAN = "mean"
    LOWER = "lower"
    UPPER = "upper"


def is_on_track(ratio: float) -> bool:
    return ratio >= 2.0 - ON_TRACK_SLACK


@dataclass(frozen=True, slots=True)
class TrendModel:
    """OLS fit of annual yield on year for one village.

    The fit is stored in centered form: it passes through (x_mean, y_mean)
    with the given slope; sxx is the centered sum of squares of years and
    resid_scale is s = sqrt(SSE / (n - 2)).
    """

    village_id: str
    n: int
    x_mean: float
    y_mean: float
    slope: float
    sxx: float
    resid_scale: float
    window: tuple[int, int]

    @property
    def df(self) -> int:
        return self.n - 2

    @property
    def intercept(self) -> float:
        return self.y_mean - self.slope * self.x_mean


@dataclass(frozen=True, slots=True)
class TrackStatus:
    """Doubling-ratio classification for one village."""

    village_id: str
    ratio: float
    on_track: bool
    flagged_degenerate: bool


def fit_village_trend(series: AnnualYieldSeries,
                      window: tuple[int, int] = DEFAULT_WINDOW,
                      include_preliminary: bool = False) -> TrendModel:
    """Fit the annual-yield trend for one village over a year window.

    Preliminary points are excluded unless include_preliminary is set.
    Raises DegenerateModelError with fewer than 3 usable points.
    """
    first, last = window
    if first > last:
        raise ValueError(f"window first year {first} exceeds last year {last}")
    points = [
        p for p in series.points
        if first <= p.year <= last and (include_preliminary or not p.preliminary)
    ]
    n = len(points)
    if n < 3:
        raise DegenerateModelError(
            f"{series.village_id}: insufficient points in {first}-{last} "
            f"({n} usable, need >= 3)"
        )
    x_mean = math.fsum(p.year for p in points) / n
    y_mean = math.fsum(p.value for p in points) / n
    sxx = math.fsum((p.year - x_mean) ** 2 for p in points)
    sxy = math.fsum((p.year - x_mean) * (p.value - y_mean) for p in points)
    syy = math.fsum((p.value - y_mean) ** 2 for p in points)
    slope = sxy / sxx
    sse = max(syy - slope * sxy, 0.0)
    resid_scale = math.sqrt(sse / (n - 2))
    return TrendModel(
        village_id=series.village_id,
        n=n,
        x_mean=x_mean,
        y_mean=y_mean,
        slope=slope,
        sxx=sxx,
        resid_scale=resid_scale,
        window=(first, last),
    )


def prediction_margin(model: TrendModel, year: float,
                      confidence: float = DEFAULT_CONFIDENCE) -> float:
    """Half-width of the prediction interval for a new observation at year."""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    if model.n < 3:
        raise DegenerateModelError(
            f"{model.village_id}: prediction interval undefined for n={model.n}"
        )
    t = student_t_quantile(0.5 + confidence / 2.0, model.df)
    dx = year - model.x_mean
    return t * model.resid_scale * math.sqrt(1.0 + 1.0 / model.n + dx * dx / model.sxx)


def project(model: TrendModel, year: float, band: Band = Band.MEAN,
            confidence: float = DEFAULT_CONFIDENCE) -> float:
    """Projected yield at a calendar year on the requested band.

    Mean: y_mean + slope * (year - x_mean). Lower/Upper subtract/add the
    prediction-interval margin; for a zero-residual fit all bands coincide.
    """
    mean = model.y_mean + model.slope * (year - model.x_mean)
    if band is Band.MEAN:
        return mean
    margin = prediction_margin(model, year, confidence)
    if band is Band.LOWER:
        return mean - margin
    return mean + margin


def doubling_ratio(model: TrendModel, baseline_year: int, end_year: int,
                   band: Band = Band.MEAN,
                   confidence: float = DEFAULT_CONFIDENCE) -> TrackStatus:
    """Ratio of projected end-year to baseline-year yield on one band.

    Baselines at or below the 1 kg/ha floor are clamped and flagged so the
    ratio stays finite and auditable.
    """
    baseline = project(model, baseline_year, band, confidence)
    end = project(model, end_year, band, confidence)
    flagged = baseline <= BASELINE_FLOOR
    if flagged:
        baseline = BASELINE_FLOOR
    ratio = end / baseline
    return TrackStatus(model.village_id, ratio, is_on_track(ratio), flagged)


@dataclass
class FitReport:
    """Villages dropped from a bulk fit, by reason."""

    insufficient_points: list[str]

    def counts(self) -> dict[str, int]:
        return {"villages_without_trend": len(self.insufficient_points)}


def fit_all(table: AnnualTable,
            window: tuple[int, int] = DEFAULT_WINDOW,
            include_preliminary: bool = False,
            ) -> tuple[dict[str, TrendModel], FitReport]:
    """Fit every village in the table; exclusions are reported, not fatal."""
    models: dict[str, TrendModel] = {}
    insufficient: list[str] = []
    for vid in table.ids():
        try:
            models[vid] = fit_village_trend(table.get(vid), window, include_preliminary)
        except DegenerateModelError:
            insufficient.append(vid)
    return models, FitReport(insufficient_points=insufficient)


@dataclass(frozen=True)
class NationalTrajectory:
    """Observed national mean yield by year plus the SDG reference line."""

    years: tuple[int, ...]
    observed_mean: tuple[float, ...]
    preliminary: tuple[bool, ...]
    sdg_years: tuple[int, ...]
    sdg_line: tuple[float, ...]
    fao_baseline: float


def national_trajectory(table: AnnualTable, fao_baseline: float,
                        baseline_year: int = 2015, end_year: int = 2030,
                        area_weighted: bool = False) -> NationalTrajectory:
    """National mean yield per observed year against the SDG doubling line.

    The reference line grows linearly from the FAO baseline in baseline_year
    to twice that value in end_year. The national mean is unweighted over
    villages by default; area_weighted switches to maize-area weights.
    """
    if len(table) == 0:
        raise EvaluationError("no villages with annual data")
    if not math.isfinite(fao_baseline) or fao_baseline <= 0:
        raise DataError(f"fao_baseline must be > 0, got {fao_baseline}")
    per_year: dict[int, list[tuple[float, float, bool]]] = {}
    for vid in table.ids():
        for p in table.get(vid).points:
            per_year.setdefault(p.year, []).append((p.value, p.area, p.preliminary))
    years = tuple(sorted(per_year))
    means = []
    prelim_flags = []
    for year in years:
        rows = per_year[year]
        if area_weighted:
            total = math.fsum(area for _, area, _ in rows)
            if total <= 0:
                raise EvaluationError(f"zero total maize area in {year}")
            means.append(math.fsum(v * area for v, area, _ in rows) / total)
        else:
            means.append(math.fsum(v for v, _, _ in rows) / len(rows))
        prelim_flags.append(any(flag for _, _, flag in rows))
    span = end_year - baseline_year
    sdg_years = tuple(range(baseline_year, end_year + 1))
    sdg_line = tuple(fao_baseline * (1.0 + (t - baseline_year) / span) for t in sdg_years)
    return NationalTrajectory(
        years=years,
        observed_mean=tuple(means),
        preliminary=tuple(prelim_flags),
        sdg_years=sdg_years,
        sdg_line=sdg_line,
        fao_baseline=fao_baseline,
    )


def track_statuses(models: Mapping[str, TrendModel], baseline_year: int,
                   end_year: int, band: Band = Band.MEAN,
                   confidence: float = DEFAULT_CONFIDENCE) -> dict[str, TrackStatus]:
    """Doubling classification for every fitted village, in sorted id order."""
    return {
        vid: doubling_ratio(models[vid], baseline_year, end_year, band, confidence)
        for vid in sorted(models)
    }
