"""Agro-ecological yield ceilings and capped scenario outcomes.

Each agro-ecological zone's ceiling is the highest village annual yield
observed in that zone over the observation window. Applying ceilings censors
every projected 2030 yield at its village's zone ceiling and recomputes all
scenario metrics on the capped values.

Additional-years under capping cannot use the uncapped closed form: villages
that hit their ceiling stop contributing growth, so the capped national mean
over future years is a concave piecewise-linear curve. The crossing (or proof
that the goal is unreachable) is found with an exact breakpoint sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DataError, EvaluationError
from .equality import CohortAssignment, exact_mean
from .model import AnnualTable, VillageRegistry
from .scenario import GOAL_SLACK, ScenarioOutcome, assemble_outcome, Anchors


@dataclass(frozen=True)
class CeilingTable:
    """Per-AEZ maximum observed annual yield over a provenance window."""

    ceilings: Mapping[str, float]
    window: tuple[int, int]

    def for_aez(self, aez_id: str) -> float:
        try:
            return self.ceilings[aez_id]
        except KeyError:
            raise DataError(f"no ceiling for AEZ {aez_id!r}") from None


def compute_ceilings(table: AnnualTable, registry: VillageRegistry,
                     window: tuple[int, int]) -> CeilingTable:
    """Highest in-window village annual yield per agro-ecological zone.

    Every zone in the registry must have at least one observation in the
    window, and the resulting ceiling must be positive.
    """
    first, last = window
    if first > last:
        raise ValueError(f"window first year {first} exceeds last year {last}")
    ceilings: dict[str, float] = {}
    for aez_id in registry.aez_ids():
        best: float | None = None
        for vid in registry.villages_in_aez(aez_id):
            if vid not in table:
                continue
            for p in table.get(vid).points:
                if first <= p.year <= last and (best is None or p.value > best):
                    best = p.value
        if best is None:
            raise DataError(
                f"AEZ {aez_id!r} has no yield observations in {first}-{last}"
            )
        if best <= 0:
            raise DataError(f"AEZ {aez_id!r} ceiling is not positive ({best})")
        ceilings[aez_id] = best
    return CeilingTable(ceilings, (first, last))


def village_ceilings(ceilings: CeilingTable, registry: VillageRegistry,
                     village_ids) -> np.ndarray:
    return np.array(
        [ceilings.for_aez(registry.aez_of(vid)) for vid in village_ids],
        dtype=np.float64,
    )


def capped_additional_years(y_end: np.ndarray, growth: np.ndarray,
                            ceiling: np.ndarray, mean_base: float) -> float:
    """Years past the end year until the capped national mean doubles the
    baseline mean, or infinity if it never can.

    Village yield k years past the end year is min(y_end + growth * k,
    ceiling): growing villages flatten at their ceiling, declining villages
    keep declining. The national mean of these is concave piecewise-linear,
    so walking the slope-change breakpoints locates the first crossing
    exactly.
    """
    n = y_end.size
    goal = 2.0 * mean_base
    capped_now = np.minimum(y_end, ceiling)
    mean_now = float(capped_now.sum()) / n
    if mean_now >= goal - abs(goal) * GOAL_SLACK:
        return 0.0

    # Each village is linear with at most one slope change:
    #   growth > 0 below ceiling: rises at `growth`, flattens at the ceiling
    #   growth < 0 above ceiling: flat at the ceiling, then declines
    events: list[tuple[float, float]] = []  # (k, slope delta)
    slope_sum = 0.0
    for i in range(n):
        g = growth[i]
        if g > 0.0:
            if y_end[i] < ceiling[i]:
                slope_sum += g
                events.append(((ceiling[i] - y_end[i]) / g, -g))
        elif g < 0.0:
            if y_end[i] > ceiling[i]:
                events.append(((ceiling[i] - y_end[i]) / g, g))
            else:
                slope_sum += g
    events.sort()

    total = float(capped_now.sum())
    k_prev = 0.0
    for k, delta in events:
        if slope_sum > 0.0:
            k_hit = k_prev + (goal * n - total) / slope_sum
            if k_hit <= k:
                return k_hit
        total += slope_sum * (k - k_prev)
        slope_sum += delta
        k_prev = k
    # Past the last breakpoint every growing village sits at its ceiling, so
    # the true slope is the sum of the permanently negative rates (<= 0); the
    # accumulated slope_sum may carry a round-off residue, so do not trust it.
    return math.inf


def apply_ceiling(outcome: ScenarioOutcome, ceilings: CeilingTable,
                  registry: VillageRegistry, assignment: CohortAssignment,
                  anchors: Anchors) -> ScenarioOutcome:
    """Censor a scenario's 2030 projections at the zone ceilings and rescore.

    The reported per-village growth is the post-cap effective rate
    (y_end_capped - y_pivot) / horizon; the additional-years figure accounts
    for capping persisting beyond the end year.
    """
    config = anchors.config
    pv = outcome.per_village
    if pv.village_ids != anchors.village_ids:
        raise EvaluationError("outcome and anchors cover different villages")
    ceiling = village_ceilings(ceilings, registry, pv.village_ids)
    y_end_capped = np.minimum(pv.y_end, ceiling)
    effective_growth = (y_end_capped - pv.y_pivot) / config.horizon
    n_capped = int((pv.y_end > ceiling).sum())
    flags = dict(outcome.flags)
    flags.pop("clamped_baseline", None)  # re-added by assemble_outcome
    flags.pop("equality_pairs_excluded", None)
    if n_capped:
        flags["capped_villages"] = n_capped
    capped = assemble_outcome(
        outcome.kind, anchors, assignment, effective_growth, y_end_capped,
        flags, capped=True,
    )
    years = capped_additional_years(
        pv.y_end, pv.growth, ceiling, exact_mean(anchors.y_base)
    )
    return ScenarioOutcome(
        kind=capped.kind,
        band=capped.band,
        capped=True,
        natl_progress_pct=capped.natl_progress_pct,
        additional_years=years,
        village_progress_pct=capped.village_progress_pct,
        equality_ratio=capped.equality_ratio,
        equality_bounds=capped.equality_bounds,
        greatest_growth=capped.greatest_growth,
        n_villages=capped.n_villages,
        flags=capped.flags,
        per_village=capped.per_village,
    )
