"""Validated snapshot directories: the unit of input for analysis commands.

A snapshot holds normalized copies of the registry and seasonal yields, the
derived annual table, and a data-quality report:

    villages.csv   aez.csv   yields.csv   annual.csv
    quality.json   meta.json
    zonal.csv            (optional, when pixels were ingested)
    boundaries.geojson   (optional, for map exports)

Files are written sorted and repr-formatted, with no timestamps, so
re-ingesting the same inputs is byte-identical.
"""

from __future__ import annotations

import csv
import json
import shutil
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError
from .ingest import (
    ZonalStat,
    build_annual_table,
    load_registry,
    load_yields,
    zonal_aggregate_file,
)
from .model import AnnualPoint, AnnualTable, AnnualYieldSeries, VillageRegistry

SNAPSHOT_FORMAT = "yieldtrack-snapshot/1"


@dataclass
class Snapshot:
    """Immutable analysis inputs loaded from a snapshot directory."""

    root: Path
    registry: VillageRegistry
    table: AnnualTable
    quality_counts: dict

    def boundaries_path(self) -> Path | None:
        path = self.root / "boundaries.geojson"
        return path if path.exists() else None


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def create_snapshot(out_dir, villages_path, yields_path, aez_path,
                    pixels_path=None, boundaries_path=None) -> Snapshot:
    """Validate raw inputs and materialize a snapshot directory."""
    registry = load_registry(villages_path, aez_path)
    observations = load_yields(yields_path, registry)
    table, quality = build_annual_table(observations, registry)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "villages.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["village_id", "name", "district", "province", "aez_id", "lon", "lat"])
        for rec in registry:
            lon = _fmt(rec.centroid[0]) if rec.centroid else ""
            lat = _fmt(rec.centroid[1]) if rec.centroid else ""
            writer.writerow([rec.village_id, rec.name, rec.district, rec.province,
                             rec.aez_id, lon, lat])

    with open(out / "aez.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["aez_id", "name"])
        for aez_id in registry.aez_ids():
            writer.writerow([aez_id, registry.aez_name(aez_id)])

    observations.sort(key=lambda o: (o.village_id, o.year, o.season.value))
    with open(out / "yields.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["village_id", "year", "season", "yield_kg_ha",
                         "maize_area_ha", "preliminary"])
        for obs in observations:
            writer.writerow([obs.village_id, obs.year, obs.season.value,
                             _fmt(obs.yield_mean), _fmt(obs.maize_area),
                             _fmt(obs.preliminary)])

    _write_annual_csv(out / "annual.csv", table)

    zonal_counts = None
    if pixels_path is not None:
        stats, report = zonal_aggregate_file(pixels_path, registry)
        with open(out / "zonal.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["village_id", "mean_yield_kg_ha", "pixel_count"])
            for vid, stat in stats.items():
                writer.writerow([vid, _fmt(stat.mean), stat.count])
        zonal_counts = {
            "villages_covered": len(stats),
            "unknown_records": report.unknown_records,
            "unknown_ids": report.unknown_ids[:50],
            "empty_villages": len(report.empty_villages),
        }

    if boundaries_path is not None:
        shutil.copyfile(boundaries_path, out / "boundaries.geojson")

    quality_doc = {
        "counts": quality.counts(),
        "single_season": sorted(quality.single_season),
        "excluded_zero_area": sorted(quality.excluded_zero_area),
        "villages_without_data": quality.villages_without_data,
    }
    if zonal_counts is not None:
        quality_doc["zonal"] = zonal_counts
    with open(out / "quality.json", "w", encoding="utf-8") as fh:
        json.dump(quality_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    years = table.years()
    meta = {
        "format": SNAPSHOT_FORMAT,
        "villages": len(registry),
        "aez": len(registry.aez_ids()),
        "observations": len(observations),
        "annual_points": sum(len(s.points) for s in table.series.values()),
        "years": [years[0], years[-1]] if years else [],
    }
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return Snapshot(out, registry, table, quality_doc["counts"])


def _write_annual_csv(path, table: AnnualTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["village_id", "year", "yield_kg_ha", "area_ha",
                         "seasons", "preliminary"])
        for vid in table.ids():
            for p in table.get(vid).points:
                writer.writerow([vid, p.year, _fmt(p.value), _fmt(p.area),
                                 p.seasons, _fmt(p.preliminary)])


def load_snapshot(root) -> Snapshot:
    """Load a snapshot directory produced by create_snapshot."""
    root = Path(root)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise DataError(f"{root}: not a snapshot directory (missing meta.json)")
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("format") != SNAPSHOT_FORMAT:
        raise DataError(f"{root}: unsupported snapshot format {meta.get('format')!r}")
    registry = load_registry(root / "villages.csv", root / "aez.csv")
    table = _load_annual_csv(root / "annual.csv", registry)
    quality_counts = {}
    quality_path = root / "quality.json"
    if quality_path.exists():
        with open(quality_path, encoding="utf-8") as fh:
            quality_counts = json.load(fh).get("counts", {})
    return Snapshot(root, registry, table, quality_counts)


def _load_annual_csv(path, registry: VillageRegistry) -> AnnualTable:
    table = AnnualTable()
    points: dict[str, list[AnnualPoint]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["village_id", "year", "yield_kg_ha", "area_ha", "seasons", "preliminary"]
        if header != expected:
            raise DataError(f"{path}: expected header {','.join(expected)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vid = row[0]
                point = AnnualPoint(
                    year=int(row[1]),
                    value=float(row[2]),
                    preliminary=row[5] == "1",
                    area=float(row[3]),
                    seasons=int(row[4]),
                )
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: bad annual row") from None
            if vid not in registry:
                raise DataError(f"{path}:{lineno}: unknown village_id {vid!r}")
            points.setdefault(vid, []).append(point)
    for vid, pts in points.items():
        table.series[vid] = AnnualYieldSeries(vid, tuple(pts))
    return table


def load_zonal_csv(path) -> dict[str, ZonalStat]:
    """Read back the per-village zonal stats written during ingestion."""
    stats: dict[str, ZonalStat] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["village_id", "mean_yield_kg_ha", "pixel_count"]:
            raise DataError(f"{path}: unexpected zonal header {header!r}")
        for row in reader:
            if not row:
                continue
            stats[row[0]] = ZonalStat(float(row[1]), int(row[2]))
    return stats
