"""yieldtrack: village-level crop yield trend diagnostics and SDG 2.3
policy scenario projections.

The package turns multi-year, village-level maize yield series into per-
village linear trends with prediction intervals, on/off-track doubling
classification, producer-inequality cohort metrics, seven policy scenario
projections with agro-ecological yield ceilings, and bootstrap error
diagnostics, exposed as a library, CLI, and JSON HTTP service.
"""

__version__ = "0.1.0"

from .equality import (
    CohortAssignment,
    InequalityReport,
    assign_cohorts,
    cohort_mean_series,
    inequality_ratio,
)
from .errors import (
    DataError,
    DegenerateModelError,
    EvaluationError,
    UndefinedAnnualYieldError,
    YieldTrackError,
)
from .feasibility import CeilingTable, apply_ceiling, compute_ceilings
from .ingest import (
    aggregate_annual,
    build_annual_table,
    load_registry,
    load_yields,
    zonal_aggregate,
    zonal_aggregate_file,
)
from .model import (
    AnnualPoint,
    AnnualTable,
    AnnualYieldSeries,
    PixelRecord,
    Season,
    SeasonalObservation,
    VillageRecord,
    VillageRegistry,
)
from .pipeline import AnalysisRun, build_run, evaluate_scenario
from .scenario import (
    Anchors,
    EngineConfig,
    ScenarioKind,
    ScenarioOutcome,
    ScenarioSpec,
    additional_years,
    build_schedule,
    compute_anchors,
    evaluate,
    resolve_kind,
    run_scenario,
    village_anchor,
)
from .trend import (
    Band,
    TrackStatus,
    TrendModel,
    doubling_ratio,
    fit_all,
    fit_village_trend,
    national_trajectory,
    project,
)

__all__ = [
    "__version__",
    # model
    "AnnualPoint", "AnnualTable", "AnnualYieldSeries", "PixelRecord",
    "Season", "SeasonalObservation", "VillageRecord", "VillageRegistry",
    # errors
    "DataError", "DegenerateModelError", "EvaluationError",
    "UndefinedAnnualYieldError", "YieldTrackError",
    # ingest
    "aggregate_annual", "build_annual_table", "load_registry", "load_yields",
    "zonal_aggregate", "zonal_aggregate_file",
    # trend
    "Band", "TrackStatus", "TrendModel", "doubling_ratio", "fit_all",
    "fit_village_trend", "national_trajectory", "project",
    # equality
    "CohortAssignment", "InequalityReport", "assign_cohorts",
    "cohort_mean_series", "inequality_ratio",
    # scenario
    "Anchors", "EngineConfig", "ScenarioKind", "ScenarioOutcome",
    "ScenarioSpec", "additional_years", "build_schedule", "compute_anchors",
    "evaluate", "resolve_kind", "run_scenario", "village_anchor",
    # feasibility
    "CeilingTable", "apply_ceiling", "compute_ceilings",
    # pipeline
    "AnalysisRun", "build_run", "evaluate_scenario",
]
