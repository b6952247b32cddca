import math

import numpy as np
import pytest

from yieldtrack.errors import DataError
from yieldtrack.feasibility import (
    CeilingTable,
    apply_ceiling,
    capped_additional_years,
    compute_ceilings,
    village_ceilings,
)
from yieldtrack.model import AnnualTable, VillageRecord, VillageRegistry
from yieldtrack.pipeline import evaluate_scenario
from yieldtrack.scenario import ScenarioKind, ScenarioSpec, resolve_kind

from util import make_series


def registry_two_zones():
    villages = [
        VillageRecord("a", "a", "d", "p", "Z1"),
        VillageRecord("b", "b", "d", "p", "Z1"),
        VillageRecord("c", "c", "d", "p", "Z2"),
    ]
    return VillageRegistry(villages, {"Z1": "one", "Z2": "two"})


class TestComputeCeilings:
    def test_max_over_zone(self):
        table = AnnualTable()
        table.series = {
            "a": make_series("a", (2019, 2020, 2021), (1500, 2913, 2200)),
            "b": make_series("b", (2019, 2020, 2021), (900, 1000, 1100)),
            "c": make_series("c", (2019, 2020, 2021), (1582, 1582, 1582)),
        }
        ceilings = compute_ceilings(table, registry_two_zones(), (2019, 2023))
        assert ceilings.for_aez("Z1") == pytest.approx(2913.0)
        assert ceilings.for_aez("Z2") == pytest.approx(1582.0)
        assert ceilings.window == (2019, 2023)

    def test_all_equal_zone(self):
        table = AnnualTable()
        table.series = {
            "a": make_series("a", (2019, 2020, 2021), (1200, 1200, 1200)),
            "b": make_series("b", (2019, 2020, 2021), (1200, 1200, 1200)),
            "c": make_series("c", (2019, 2020, 2021), (800, 800, 800)),
        }
        ceilings = compute_ceilings(table, registry_two_zones(), (2019, 2023))
        assert ceilings.for_aez("Z1") == 1200.0

    def test_zone_without_observations_errors(self):
        table = AnnualTable()
        table.series = {
            "a": make_series("a", (2019, 2020, 2021), (1200, 1200, 1200)),
        }
        with pytest.raises(DataError, match="Z2"):
            compute_ceilings(table, registry_two_zones(), (2019, 2023))

    def test_window_filters_years(self):
        table = AnnualTable()
        table.series = {
            "a": make_series("a", (2019, 2020, 2024), (1200, 1300, 9000)),
            "c": make_series("c", (2019, 2020), (800, 850)),
        }
        reg = VillageRegistry(
            [VillageRecord("a", "a", "d", "p", "Z1"), VillageRecord("c", "c", "d", "p", "Z2")],
            {"Z1": "one", "Z2": "two"},
        )
        ceilings = compute_ceilings(table, reg, (2019, 2023))
        assert ceilings.for_aez("Z1") == 1300.0  # 2024 outside the window


class TestCappedAdditionalYears:
    def test_matches_closed_form_without_binding_ceilings(self):
        y_end = np.array([1200.0, 1400.0, 1000.0])
        growth = np.array([25.0, 10.0, 40.0])
        huge = np.full(3, 1e12)
        mean_base = 1000.0
        expected = (2000.0 - 1200.0) / 25.0  # (goal - mean_end) / mean_growth
        got = capped_additional_years(y_end, growth, huge, mean_base)
        assert got == pytest.approx(expected, rel=1e-9)

    def test_goal_met_is_zero(self):
        got = capped_additional_years(
            np.array([2100.0, 1900.0]), np.array([5.0, 5.0]),
            np.full(2, 1e12), 1000.0,
        )
        assert got == 0.0

    def test_unreachable_is_infinite(self):
        # ceilings below the doubled baseline: no growth can ever reach it
        y_end = np.array([1500.0, 1600.0])
        growth = np.array([100.0, 100.0])
        ceiling = np.array([1700.0, 1800.0])
        assert capped_additional_years(y_end, growth, ceiling, 1000.0) == math.inf

    def test_ceiling_delays_crossing(self):
        # village 0 caps at k = 2 (total 3200 of the 4800 needed); village 1
        # then carries the mean alone at +100/yr, crossing at k = 18
        y_end = np.array([1900.0, 1000.0])
        growth = np.array([50.0, 100.0])
        ceiling = np.array([2000.0, 10000.0])
        got = capped_additional_years(y_end, growth, ceiling, 1200.0)
        assert got == pytest.approx(18.0, rel=1e-12)

    def test_declining_village_above_ceiling(self):
        # capped at start, declines after crossing below its ceiling
        y_end = np.array([3000.0])
        growth = np.array([-100.0])
        ceiling = np.array([2500.0])
        assert capped_additional_years(y_end, growth, ceiling, 1400.0) == math.inf


@pytest.fixture(scope="module")
def capped_context(snapshot, mean_run):
    ceilings = compute_ceilings(snapshot.table, snapshot.registry, (2019, 2023))
    return snapshot, mean_run, ceilings


class TestApplyCeiling:
    def test_projection_capped_examples(self, capped_context):
        snapshot, run, ceilings = capped_context
        spec = ScenarioSpec(kind=ScenarioKind.VILLAGE_SDG, config=run.config)
        uncapped = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
        capped = apply_ceiling(
            uncapped, ceilings, snapshot.registry, run.assignment, run.anchors
        )
        limits = village_ceilings(
            ceilings, snapshot.registry, capped.per_village.village_ids
        )
        assert np.all(capped.per_village.y_end <= limits + 1e-12)
        below = uncapped.per_village.y_end <= limits
        assert np.all(
            capped.per_village.y_end[below] == uncapped.per_village.y_end[below]
        )
        assert capped.capped is True

    def test_monotone_and_idempotent(self, capped_context):
        snapshot, run, ceilings = capped_context
        for alias in ("sc1", "sc2", "sc3", "sc4"):
            spec = ScenarioSpec(kind=resolve_kind(alias), config=run.config)
            uncapped = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
            capped = apply_ceiling(
                uncapped, ceilings, snapshot.registry, run.assignment, run.anchors
            )
            assert capped.natl_progress_pct <= uncapped.natl_progress_pct + 1e-9
            assert capped.village_progress_pct <= uncapped.village_progress_pct + 1e-9
            twice = apply_ceiling(
                capped, ceilings, snapshot.registry, run.assignment, run.anchors
            )
            assert np.all(twice.per_village.y_end == capped.per_village.y_end)
            assert twice.natl_progress_pct == capped.natl_progress_pct
            assert twice.additional_years == capped.additional_years

    def test_low_ceilings_make_goal_unreachable(self, capped_context):
        snapshot, run, _ = capped_context
        from yieldtrack.equality import exact_mean

        mean_base = exact_mean(run.anchors.y_base)
        low = CeilingTable(
            {z: 1.8 * mean_base for z in snapshot.registry.aez_ids()}, (2019, 2023)
        )
        assert max(low.ceilings.values()) < 2.0 * mean_base
        for alias in ("sc1", "sc2", "sc3", "sc4"):
            spec = ScenarioSpec(kind=resolve_kind(alias), config=run.config)
            uncapped = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
            capped = apply_ceiling(
                uncapped, low, snapshot.registry, run.assignment, run.anchors
            )
            assert capped.natl_progress_pct < 100.0
            assert capped.additional_years == math.inf

    def test_effective_growth_reported(self, capped_context):
        snapshot, run, ceilings = capped_context
        spec = ScenarioSpec(kind=ScenarioKind.VILLAGE_SDG, config=run.config)
        uncapped = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
        capped = apply_ceiling(
            uncapped, ceilings, snapshot.registry, run.assignment, run.anchors
        )
        pv = capped.per_village
        expected = (pv.y_end - pv.y_pivot) / run.config.horizon
        assert np.allclose(pv.growth, expected, rtol=1e-12)

    def test_spec_flag_routes_through_pipeline(self, capped_context):
        snapshot, run, _ = capped_context
        spec = ScenarioSpec(
            kind=ScenarioKind.NATIONAL_SDG, config=run.config, aez_cap=True
        )
        outcome = evaluate_scenario(run, spec, snapshot.table, snapshot.registry)
        assert outcome.capped is True
