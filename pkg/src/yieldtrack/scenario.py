"""Policy scenario construction and evaluation.

Each scenario assigns every village a yield growth schedule that applies from
the pivot year (2024) to the end year (2030), then scores the projected 2030
outcomes on five metrics: national progress toward doubling the baseline mean,
additional years needed to reach the goal, share of villages doubling their
own baseline, the 2030 top/bottom cohort inequality ratio, and the greatest
per-village growth rate the scenario demands.

Seven named scenarios are built in:

  sc1  current                 business as usual: each village keeps its
                               fitted trend
  sc2  national_sdg            one uniform growth rate solving the national
                               doubling target
  sc3  village_sdg             every village doubles its own baseline (never
                               slower than its current trend)
  sc4  equitable               every village converges to the 2030 yield
                               projected for the top decile cohort under sc1
  sc5  equitable_national_sdg  every village converges to twice the national
                               baseline mean
  sc6  equitable_village_sdg   every village converges to the largest doubled
                               village baseline
  sc7  max_achieved_growth     each village repeats its best observed
                               year-over-year gain

plus custom_uniform (a caller-chosen flat rate) and custom_target (a
caller-chosen common 2030 yield).

Lower/upper runs rerun the whole analysis on the corresponding prediction
band: anchors, targets, and schedules are recomputed end to end, with the
band applied at every projected year. Because of that, the business-as-usual
endpoint under a band run is the banded 2030 projection itself, and its
implied growth rate over the pivot-to-end span replaces the raw slope in
schedules; on the mean band the two coincide exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .equality import CohortAssignment, exact_mean, inequality_ratio
from .errors import EvaluationError
from .model import AnnualTable
from .trend import (
    BASELINE_FLOOR,
    Band,
    DEFAULT_CONFIDENCE,
    DEFAULT_WINDOW,
    ON_TRACK_SLACK,
    TrendModel,
    project,
)

# Relative slack for "goal met" checks, so a schedule solved to land exactly
# on the target is not pushed to a nonzero additional-years figure by float
# round-trips.
GOAL_SLACK = 1e-9


class ScenarioKind(str, Enum):
    CURRENT = "current"
    NATIONAL_SDG = "national_sdg"
    VILLAGE_SDG = "village_sdg"
    EQUITABLE = "equitable"
    EQUITABLE_NATIONAL_SDG = "equitable_national_sdg"
    EQUITABLE_VILLAGE_SDG = "equitable_village_sdg"
    MAX_ACHIEVED_GROWTH = "max_achieved_growth"
    CUSTOM_UNIFORM = "custom_uniform"
    CUSTOM_TARGET = "custom_target"


SCENARIO_ALIASES: dict[str, ScenarioKind] = {
    "sc1": ScenarioKind.CURRENT,
    "sc2": ScenarioKind.NATIONAL_SDG,
    "sc3": ScenarioKind.VILLAGE_SDG,
    "sc4": ScenarioKind.EQUITABLE,
    "sc5": ScenarioKind.EQUITABLE_NATIONAL_SDG,
    "sc6": ScenarioKind.EQUITABLE_VILLAGE_SDG,
    "sc7": ScenarioKind.MAX_ACHIEVED_GROWTH,
}

# Scenarios that drive every village to one common 2030 yield. Their
# projections are assigned the target exactly (rather than recomputed from
# the derived growth rate) so the 2030 equality ratio is exactly 1.0.
TARGET_KINDS = frozenset(
    {
        ScenarioKind.EQUITABLE,
        ScenarioKind.EQUITABLE_NATIONAL_SDG,
        ScenarioKind.EQUITABLE_VILLAGE_SDG,
        ScenarioKind.CUSTOM_TARGET,
    }
)


def resolve_kind(name: str) -> ScenarioKind:
    """Map a scenario name (canonical, sc1..sc7, or hyphenated) to its kind."""
    key = name.strip().lower().replace("-", "_")
    if key in SCENARIO_ALIASES:
        return SCENARIO_ALIASES[key]
    try:
        return ScenarioKind(key)
    except ValueError:
        raise EvaluationError(f"unknown scenario kind {name!r}") from None


@dataclass(frozen=True)
class EngineConfig:
    """Shared projection parameters for trends, scenarios, and exports."""

    baseline_year: int = 2015
    end_year: int = 2030
    pivot_year: int = 2024
    confidence: float = DEFAULT_CONFIDENCE
    band: Band = Band.MEAN
    include_preliminary: bool = False
    fao_baseline: float = 1531.5
    window: tuple[int, int] = DEFAULT_WINDOW
    cohort_year: int = 2019
    area_weighted_national_mean: bool = False

    def __post_init__(self):
        if not self.baseline_year < self.pivot_year <= self.end_year:
            raise ValueError(
                f"need baseline < pivot <= end, got {self.baseline_year}, "
                f"{self.pivot_year}, {self.end_year}"
            )
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence}")

    @property
    def horizon(self) -> int:
        """Years between pivot and end over which schedules act."""
        return self.end_year - self.pivot_year


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative what-if definition evaluated by this module."""

    kind: ScenarioKind
    config: EngineConfig = field(default_factory=EngineConfig)
    aez_cap: bool = False
    uniform_growth: float | None = None  # custom_uniform, kg/ha/year
    target: float | None = None  # custom_target, kg/ha

    def __post_init__(self):
        if self.kind is ScenarioKind.CUSTOM_UNIFORM:
            if self.uniform_growth is None or not math.isfinite(self.uniform_growth):
                raise EvaluationError("custom_uniform requires a finite growth rate g")
        if self.kind is ScenarioKind.CUSTOM_TARGET:
            if self.target is None or not self.target > 0:
                raise EvaluationError("custom_target requires a target yield > 0")


@dataclass
class Anchors:
    """Band-consistent projections every scenario builds on.

    y_base is the baseline-year backcast clamped at the 1 kg/ha floor;
    y_pivot the pivot-year projection; y_end_current the business-as-usual
    end-year projection; g_current its implied pivot-to-end growth (equal to
    the OLS slope on the mean band).
    """

    village_ids: tuple[str, ...]
    y_base: np.ndarray
    y_pivot: np.ndarray
    y_end_current: np.ndarray
    slope: np.ndarray
    g_current: np.ndarray
    clamped: np.ndarray
    config: EngineConfig

    def __len__(self) -> int:
        return len(self.village_ids)

    def index_of(self) -> dict[str, int]:
        return {vid: i for i, vid in enumerate(self.village_ids)}


def village_anchor(model: TrendModel, config: EngineConfig) -> tuple[float, float, float]:
    """(baseline backcast, pivot projection, growth rate) for one village.

    Backcasts at or below the 1 kg/ha floor are clamped. The growth rate is
    the fitted slope; band runs move the anchors, not the slope.
    """
    y_base = project(model, config.baseline_year, config.band, config.confidence)
    if y_base <= BASELINE_FLOOR:
        y_base = BASELINE_FLOOR
    y_pivot = project(model, config.pivot_year, config.band, config.confidence)
    return y_base, y_pivot, model.slope


def compute_anchors(models: Mapping[str, TrendModel], config: EngineConfig) -> Anchors:
    """Assemble anchor arrays for all fitted villages in sorted id order."""
    if not models:
        raise EvaluationError("no villages with a valid trend model")
    ids = tuple(sorted(models))
    n = len(ids)
    y_base = np.empty(n)
    y_pivot = np.empty(n)
    y_end = np.empty(n)
    slope = np.empty(n)
    g_current = np.empty(n)
    clamped = np.zeros(n, dtype=bool)
    horizon = config.horizon
    for i, vid in enumerate(ids):
        model = models[vid]
        base = project(model, config.baseline_year, config.band, config.confidence)
        if base <= BASELINE_FLOOR:
            base = BASELINE_FLOOR
            clamped[i] = True
        y_base[i] = base
        y_pivot[i] = project(model, config.pivot_year, config.band, config.confidence)
        y_end[i] = project(model, config.end_year, config.band, config.confidence)
        slope[i] = model.slope
        if config.band is Band.MEAN:
            g_current[i] = model.slope
        else:
            g_current[i] = (y_end[i] - y_pivot[i]) / horizon
    return Anchors(ids, y_base, y_pivot, y_end, slope, g_current, clamped, config)


@dataclass
class Schedule:
    """Per-village growth rates from the pivot year, plus a common target
    for the scenarios that converge every village to one 2030 yield."""

    kind: ScenarioKind
    growth: np.ndarray
    target: float | None = None
    fallback_ids: tuple[str, ...] = ()
    flags: dict[str, int] = field(default_factory=dict)


def _max_observed_delta(table: AnnualTable, vid: str, config: EngineConfig) -> float | None:
    """Largest observed gain between consecutive calendar years, in-window."""
    if vid not in table:
        return None
    first, last = config.window
    points = [
        p for p in table.get(vid).points
        if first <= p.year <= last and (config.include_preliminary or not p.preliminary)
    ]
    best: float | None = None
    for a, b in zip(points, points[1:]):
        if b.year - a.year != 1:
            continue
        delta = b.value - a.value
        if best is None or delta > best:
            best = delta
    return best


def build_schedule(spec: ScenarioSpec, anchors: Anchors,
                   assignment: CohortAssignment | None = None,
                   table: AnnualTable | None = None) -> Schedule:
    """Construct the per-village growth schedule for a scenario.

    The equitable scenario (sc4) needs the cohort assignment to locate the
    top decile; the max-achieved-growth scenario (sc7) needs the observed
    annual table to enumerate year-over-year deltas.
    """
    config = spec.config
    horizon = config.horizon
    kind = spec.kind
    n = len(anchors)
    flags: dict[str, int] = {}

    if kind is ScenarioKind.CURRENT:
        return Schedule(kind, anchors.g_current.copy())

    if kind is ScenarioKind.NATIONAL_SDG:
        mean_base = exact_mean(anchors.y_base)
        mean_pivot = exact_mean(anchors.y_pivot)
        g = (2.0 * mean_base - mean_pivot) / horizon
        return Schedule(kind, np.full(n, g))

    if kind is ScenarioKind.VILLAGE_SDG:
        required = (2.0 * anchors.y_base - anchors.y_pivot) / horizon
        return Schedule(kind, np.maximum(anchors.g_current, required))

    if kind is ScenarioKind.EQUITABLE:
        if assignment is None:
            raise EvaluationError("equitable scenario requires a cohort assignment")
        index = anchors.index_of()
        top_idx = [index[v] for v in assignment.members(10) if v in index]
        if not top_idx:
            raise EvaluationError("no top-decile cohort member has a trend model")
        target = exact_mean(anchors.y_end_current[top_idx])
        return _target_schedule(kind, target, anchors, horizon, flags)

    if kind is ScenarioKind.EQUITABLE_NATIONAL_SDG:
        target = 2.0 * exact_mean(anchors.y_base)
        return _target_schedule(kind, target, anchors, horizon, flags)

    if kind is ScenarioKind.EQUITABLE_VILLAGE_SDG:
        target = 2.0 * float(anchors.y_base.max())
        return _target_schedule(kind, target, anchors, horizon, flags)

    if kind is ScenarioKind.MAX_ACHIEVED_GROWTH:
        if table is None:
            raise EvaluationError(
                "max_achieved_growth scenario requires the observed annual table"
            )
        growth = np.empty(n)
        fallback: list[str] = []
        for i, vid in enumerate(anchors.village_ids):
            delta = _max_observed_delta(table, vid, config)
            if delta is None:
                growth[i] = anchors.g_current[i]
                fallback.append(vid)
            else:
                growth[i] = delta
        if fallback:
            flags["growth_fallback"] = len(fallback)
        never_grew = int((growth < 0).sum())
        if never_grew:
            flags["never_grew"] = never_grew
        return Schedule(kind, growth, fallback_ids=tuple(fallback), flags=flags)

    if kind is ScenarioKind.CUSTOM_UNIFORM:
        return Schedule(kind, np.full(n, float(spec.uniform_growth)))

    if kind is ScenarioKind.CUSTOM_TARGET:
        return _target_schedule(kind, float(spec.target), anchors, horizon, flags)

    raise EvaluationError(f"unhandled scenario kind {kind}")


def _target_schedule(kind, target, anchors, horizon, flags):
    growth = (target - anchors.y_pivot) / horizon
    negative = int((growth < 0).sum())
    if negative:
        flags["negative_growth"] = negative
    return Schedule(kind, growth, target=target, flags=flags)


def additional_years(mean_y_base: float, mean_y_end: float, mean_growth: float) -> float:
    """Years past the end year needed to double the baseline mean.

    Zero when the goal is met at the end year (within relative slack),
    infinite when it is unmet and mean growth is non-positive.
    """
    goal = 2.0 * mean_y_base
    if mean_y_end >= goal - abs(goal) * GOAL_SLACK:
        return 0.0
    if mean_growth > 0.0:
        return (goal - mean_y_end) / mean_growth
    return math.inf


@dataclass(frozen=True)
class PerVillageResult:
    """Per-village scenario arrays aligned to village_ids."""

    village_ids: tuple[str, ...]
    y_base: np.ndarray
    y_pivot: np.ndarray
    growth: np.ndarray
    y_end: np.ndarray
    ratio: np.ndarray
    on_track: np.ndarray


@dataclass(frozen=True)
class ScenarioOutcome:
    """Five scenario metrics plus the per-village growth table."""

    kind: ScenarioKind
    band: Band
    capped: bool
    natl_progress_pct: float
    additional_years: float
    village_progress_pct: float
    equality_ratio: float
    equality_bounds: tuple[float, float]
    greatest_growth: float
    n_villages: int
    flags: dict[str, int]
    per_village: PerVillageResult

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.kind.value,
            "band": self.band.value,
            "capped": self.capped,
            "natl_progress_pct": _json_number(self.natl_progress_pct),
            "additional_years": _json_number(self.additional_years),
            "village_progress_pct": _json_number(self.village_progress_pct),
            "equality_ratio": _json_number(self.equality_ratio),
            "bounds": [_json_number(self.equality_bounds[0]),
                       _json_number(self.equality_bounds[1])],
            "greatest_growth": _json_number(self.greatest_growth),
            "n_villages": self.n_villages,
            "flags": dict(sorted(self.flags.items())),
        }


def _json_number(x: float):
    """Standard JSON lacks infinities; encode them as strings."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(x)


def _equality_on_projections(y_end: np.ndarray, anchors: Anchors,
                             assignment: CohortAssignment,
                             end_year: int):
    index = anchors.index_of()
    top_idx = [index[v] for v in assignment.members(10) if v in index]
    bottom_idx = [index[v] for v in assignment.members(1) if v in index]
    if not top_idx or not bottom_idx:
        raise EvaluationError("a decile cohort has no member with a trend model")
    return inequality_ratio(
        y_end[top_idx].tolist(), y_end[bottom_idx].tolist(), end_year
    )


def assemble_outcome(kind: ScenarioKind, anchors: Anchors,
                     assignment: CohortAssignment,
                     growth: np.ndarray, y_end: np.ndarray,
                     flags: dict[str, int], capped: bool) -> ScenarioOutcome:
    """Score per-village projections into the five scenario metrics."""
    config = anchors.config
    n = len(anchors)
    if n == 0:
        raise EvaluationError("no villages to evaluate")
    ratio = y_end / anchors.y_base
    on_track = ratio >= 2.0 - ON_TRACK_SLACK
    mean_base = exact_mean(anchors.y_base)
    mean_end = exact_mean(y_end)
    mean_growth = exact_mean(growth)
    natl_progress = 100.0 * (mean_end - mean_base) / mean_base
    years = additional_years(mean_base, mean_end, mean_growth)
    village_progress = 100.0 * int(on_track.sum()) / n
    equality = _equality_on_projections(y_end, anchors, assignment, config.end_year)
    all_flags = dict(flags)
    clamped = int(anchors.clamped.sum())
    if clamped:
        all_flags["clamped_baseline"] = clamped
    if equality.excluded_pairs:
        all_flags["equality_pairs_excluded"] = equality.excluded_pairs
    return ScenarioOutcome(
        kind=kind,
        band=config.band,
        capped=capped,
        natl_progress_pct=natl_progress,
        additional_years=years,
        village_progress_pct=village_progress,
        equality_ratio=equality.ratio,
        equality_bounds=equality.bounds,
        greatest_growth=float(growth.max()),
        n_villages=n,
        flags=all_flags,
        per_village=PerVillageResult(
            village_ids=anchors.village_ids,
            y_base=anchors.y_base.copy(),
            y_pivot=anchors.y_pivot.copy(),
            growth=growth.copy(),
            y_end=y_end.copy(),
            ratio=ratio,
            on_track=on_track,
        ),
    )


def evaluate(spec: ScenarioSpec, schedule: Schedule, anchors: Anchors,
             assignment: CohortAssignment,
             extra_flags: Mapping[str, int] | None = None) -> ScenarioOutcome:
    """Project 2030 outcomes for a built schedule and score the metrics.

    Common-target scenarios land every village exactly on the target, and the
    business-as-usual scenario lands exactly on the banded end-year
    projection; everything else projects y_pivot + growth * horizon.
    """
    config = spec.config
    if schedule.kind is not spec.kind:
        raise EvaluationError(
            f"schedule built for {schedule.kind}, evaluating {spec.kind}"
        )
    if anchors.config != config:
        raise EvaluationError("anchors were computed under a different configuration")
    if spec.kind in TARGET_KINDS:
        y_end = np.full(len(anchors), schedule.target, dtype=np.float64)
    elif spec.kind is ScenarioKind.CURRENT:
        y_end = anchors.y_end_current.copy()
    else:
        y_end = anchors.y_pivot + schedule.growth * config.horizon
    flags = dict(schedule.flags)
    if extra_flags:
        flags.update(extra_flags)
    return assemble_outcome(
        spec.kind, anchors, assignment, schedule.growth, y_end, flags, capped=False
    )


def run_scenario(spec: ScenarioSpec, anchors: Anchors,
                 assignment: CohortAssignment,
                 table: AnnualTable | None = None,
                 extra_flags: Mapping[str, int] | None = None) -> ScenarioOutcome:
    """Build the schedule and evaluate it in one step (uncapped)."""
    schedule = build_schedule(spec, anchors, assignment=assignment, table=table)
    return evaluate(spec, schedule, anchors, assignment, extra_flags=extra_flags)
