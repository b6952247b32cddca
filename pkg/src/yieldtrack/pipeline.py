"""High-level orchestration: snapshot -> trends -> cohorts -> scenarios.

This is the facade the CLI and service build on. An AnalysisRun bundles
everything derived from one EngineConfig (fitted models, anchors, cohort
assignment) so repeated scenario evaluations share the expensive parts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .equality import CohortAssignment, assign_cohorts
from .errors import DataError, EvaluationError
from .feasibility import CeilingTable, apply_ceiling, compute_ceilings
from .model import AnnualTable, VillageRegistry
from .scenario import (
    Anchors,
    EngineConfig,
    ScenarioOutcome,
    ScenarioSpec,
    compute_anchors,
    run_scenario,
)
from .snapshot import Snapshot
from .trend import FitReport, TrendModel, fit_all


@dataclass
class AnalysisRun:
    """Everything derived from one snapshot under one configuration."""

    config: EngineConfig
    models: dict[str, TrendModel]
    fit_report: FitReport
    anchors: Anchors
    assignment: CohortAssignment

    @property
    def n_villages(self) -> int:
        return len(self.models)


def build_run(table: AnnualTable, config: EngineConfig) -> AnalysisRun:
    """Fit trends, compute anchors, and assign cohorts for one configuration."""
    models, fit_report = fit_all(table, config.window, config.include_preliminary)
    if not models:
        raise DataError(
            f"no village trend could be fitted: insufficient points in "
            f"{config.window[0]}-{config.window[1]} (need >= 3 usable years)"
        )
    anchors = compute_anchors(models, config)
    cohort_values = table.values_at(config.cohort_year)
    assignment = assign_cohorts(cohort_values, config.cohort_year)
    return AnalysisRun(
        config=config,
        models=models,
        fit_report=fit_report,
        anchors=anchors,
        assignment=assignment,
    )


def evaluate_scenario(run: AnalysisRun, spec: ScenarioSpec, table: AnnualTable,
                      registry: VillageRegistry | None = None,
                      ceilings: CeilingTable | None = None) -> ScenarioOutcome:
    """Run one scenario against a prepared analysis run.

    When aez_cap is set on the scenario, ceilings are computed
    from the observed table (or taken from the caller) and applied after the
    uncapped evaluation.
    """
    extra = run.fit_report.counts()
    extra = {k: v for k, v in extra.items() if v}
    outcome = run_scenario(spec, run.anchors, run.assignment, table=table,
                           extra_flags=extra)
    if spec.aez_cap:
        if registry is None:
            raise EvaluationError("aez_cap requires the village registry")
        if ceilings is None:
            ceilings = compute_ceilings(table, registry, spec.config.window)
        outcome = apply_ceiling(outcome, ceilings, registry, run.assignment,
                                run.anchors)
    return outcome


def run_from_snapshot(snapshot: Snapshot, spec: ScenarioSpec) -> ScenarioOutcome:
    """Convenience: build the run and evaluate one scenario from a snapshot."""
    run = build_run(snapshot.table, spec.config)
    return evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
