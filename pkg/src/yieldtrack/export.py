"""Serialization of analysis products: CSV tables and GeoJSON choropleths.

All writers format floats with repr (shortest round-trip form) and emit rows
in sorted village-id order, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable, Mapping, Sequence

from .equality import CohortSeries, InequalityReport
from .errors import DataError
from .feasibility import CeilingTable
from .scenario import ScenarioOutcome
from .trend import Band, NationalTrajectory, TrackStatus, TrendModel, project

DEFAULT_BREAKS = (1.0, 1.5, 2.0)
NODATA_CLASS = "nodata"


def class_labels(breaks: Sequence[float] = DEFAULT_BREAKS) -> list[str]:
    """Ordered ratio-class labels for a set of ascending break values."""
    if len(breaks) == 0 or any(b <= a for a, b in zip(breaks, breaks[1:])):
        raise ValueError(f"breaks must be ascending and non-empty, got {breaks}")
    labels = [f"<{breaks[0]:g}"]
    for lo, hi in zip(breaks, breaks[1:]):
        labels.append(f"{lo:g}-{hi:g}")
    labels.append(f">={breaks[-1]:g}")
    return labels


def classify_ratio(ratio: float, breaks: Sequence[float] = DEFAULT_BREAKS) -> str:
    """Lower-inclusive ratio class (a ratio equal to a break joins the class
    above it)."""
    labels = class_labels(breaks)
    for i, b in enumerate(breaks):
        if ratio < b:
            return labels[i]
    return labels[-1]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _write_csv(fh, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def write_trend_csv(fh, models: Mapping[str, TrendModel],
                    statuses: Mapping[str, TrackStatus],
                    baseline_year: int, end_year: int, band: Band,
                    confidence: float = 0.95) -> None:
    """Per-village trend export: slope, band projections, doubling status."""
    rows = []
    for vid in sorted(statuses):
        model = models[vid]
        status = statuses[vid]
        y_base = project(model, baseline_year, band, confidence)
        if status.flagged_degenerate:
            y_base = 1.0
        y_end = project(model, end_year, band, confidence)
        rows.append(
            (vid, model.slope, y_base, y_end, status.ratio, status.on_track,
             band.value, status.flagged_degenerate)
        )
    _write_csv(
        fh,
        ["village_id", "slope", "y2015", "y2030", "ratio", "on_track", "band", "flagged"],
        rows,
    )


def write_trajectory_csv(fh, trajectory: NationalTrajectory) -> None:
    """Observed national means and SDG reference line, one row per year."""
    observed = dict(zip(trajectory.years, zip(trajectory.observed_mean,
                                              trajectory.preliminary)))
    sdg = dict(zip(trajectory.sdg_years, trajectory.sdg_line))
    rows = []
    for year in sorted(set(trajectory.years) | set(trajectory.sdg_years)):
        mean, prelim = observed.get(year, ("", ""))
        rows.append((year, mean, sdg.get(year, ""), prelim))
    _write_csv(fh, ["year", "national_mean", "sdg_line", "preliminary"], rows)


def write_cohort_means_csv(fh, series: CohortSeries) -> None:
    rows = [
        (c.year, c.decile, c.mean_yield)
        for c in sorted(series.cells, key=lambda c: (c.year, c.decile))
    ]
    _write_csv(fh, ["year", "decile", "mean_yield"], rows)


def write_inequality_csv(fh, reports: Sequence[InequalityReport]) -> None:
    rows = [
        (r.year, r.ratio, r.bounds[0], r.bounds[1], r.preliminary)
        for r in sorted(reports, key=lambda r: r.year)
    ]
    _write_csv(fh, ["year", "ratio", "lo", "hi", "preliminary"], rows)


def write_scenario_csv(fh, outcome: ScenarioOutcome) -> None:
    """Per-village scenario table: anchors, growth, 2030 yield, status."""
    pv = outcome.per_village
    rows = [
        (pv.village_ids[i], pv.y_base[i], pv.y_pivot[i], pv.growth[i],
         pv.y_end[i], pv.ratio[i], bool(pv.on_track[i]))
        for i in range(len(pv.village_ids))
    ]
    _write_csv(
        fh,
        ["village_id", "y2015", "y2024", "growth", "y2030", "ratio", "on_track"],
        rows,
    )


def write_ceiling_csv(fh, ceilings: CeilingTable) -> None:
    rows = [
        (aez_id, ceilings.ceilings[aez_id], ceilings.window[0], ceilings.window[1])
        for aez_id in sorted(ceilings.ceilings)
    ]
    _write_csv(fh, ["aez_id", "ceiling_kg_ha", "window_first", "window_last"], rows)


def write_convergence_csv(fh, curve) -> None:
    _write_csv(
        fh,
        ["n", "running_mean"],
        zip(curve.sample_sizes, curve.running_means),
    )


def export_map(results: Mapping[str, Mapping[str, float | bool]],
               boundaries: dict,
               breaks: Sequence[float] = DEFAULT_BREAKS) -> dict:
    """Attach ratio classes to village boundary features.

    `results` maps village_id to a mapping with at least `ratio` and
    `on_track` (optionally `growth`). Boundary features must carry a
    village_id property; features without a matching result are classed
    "nodata" and counted in the collection's `nodata_count`.
    """
    if boundaries.get("type") != "FeatureCollection":
        raise DataError("boundaries must be a GeoJSON FeatureCollection")
    labels = class_labels(breaks)
    features = []
    nodata = 0
    for feature in boundaries.get("features", []):
        props = dict(feature.get("properties") or {})
        vid = props.get("village_id")
        row = results.get(vid) if vid is not None else None
        if row is None:
            nodata += 1
            props.update({"ratio": None, "on_track": None, "growth": None,
                          "class": NODATA_CLASS})
        else:
            ratio = float(row["ratio"])
            props.update(
                {
                    "ratio": ratio,
                    "on_track": bool(row["on_track"]),
                    "growth": float(row["growth"]) if "growth" in row else None,
                    "class": classify_ratio(ratio, breaks),
                }
            )
        features.append(
            {
                "type": "Feature",
                "geometry": feature.get("geometry"),
                "properties": props,
            }
        )
    return {
        "type": "FeatureCollection",
        "class_labels": labels + [NODATA_CLASS],
        "nodata_count": nodata,
        "features": features,
    }


def simplify_boundaries(boundaries: dict, tolerance: float) -> dict:
    """Thin polygon vertices to a minimum spacing (in coordinate degrees).

    Runs of consecutive vertices closer than the tolerance collapse onto the
    run's first vertex; ring closure is preserved. A ring that would fall
    below four points (triangle plus closure) is kept unchanged. Zero
    tolerance returns the input untouched.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    if tolerance == 0:
        return boundaries

    def thin_ring(ring):
        kept = [ring[0]]
        for point in ring[1:-1]:
            last = kept[-1]
            if max(abs(point[0] - last[0]), abs(point[1] - last[1])) >= tolerance:
                kept.append(point)
        kept.append(ring[-1])
        return kept if len(kept) >= 4 else ring

    def thin_geometry(geometry):
        if geometry is None:
            return None
        kind = geometry.get("type")
        if kind == "Polygon":
            coords = [thin_ring(ring) for ring in geometry["coordinates"]]
        elif kind == "MultiPolygon":
            coords = [
                [thin_ring(ring) for ring in poly] for poly in geometry["coordinates"]
            ]
        else:
            return geometry
        return {"type": kind, "coordinates": coords}

    return {
        **boundaries,
        "features": [
            {**feature, "geometry": thin_geometry(feature.get("geometry"))}
            for feature in boundaries.get("features", [])
        ],
    }


def scenario_map_rows(outcome: ScenarioOutcome) -> dict[str, dict]:
    """Per-village mapping consumed by export_map, from a scenario outcome."""
    pv = outcome.per_village
    return {
        pv.village_ids[i]: {
            "ratio": float(pv.ratio[i]),
            "on_track": bool(pv.on_track[i]),
            "growth": float(pv.growth[i]),
        }
        for i in range(len(pv.village_ids))
    }


def trend_map_rows(statuses: Mapping[str, TrackStatus],
                   models: Mapping[str, TrendModel]) -> dict[str, dict]:
    """Per-village mapping consumed by export_map, from trend statuses."""
    return {
        vid: {
            "ratio": status.ratio,
            "on_track": status.on_track,
            "growth": models[vid].slope,
        }
        for vid, status in statuses.items()
    }
