"""Loading, validation, and aggregation of yield data.

Input formats:
  villages.csv  village_id,name,district,province,aez_id,lon,lat  (lon/lat may be blank)
  aez.csv       aez_id,name
  yields.csv    village_id,year,season,yield_kg_ha,maize_area_ha,preliminary
                with season in {A, B} and preliminary in {0, 1}
  pixels        binary (magic "YTPX", see read_pixel_file) or CSV
                village_id,yield_kg_ha

Annual yields are the per-village mean of season yields weighted by the maize
area cultivated in each season; a year with a single contributing season
carries that season's yield unweighted.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, UndefinedAnnualYieldError
from .model import (
    AnnualPoint,
    AnnualTable,
    AnnualYieldSeries,
    DataQualityReport,
    PixelRecord,
    Season,
    SeasonalObservation,
    VillageRecord,
    VillageRegistry,
)

PIXEL_MAGIC = b"YTPX"
PIXEL_VERSION = 1

VILLAGES_HEADER = ["village_id", "name", "district", "province", "aez_id", "lon", "lat"]
AEZ_HEADER = ["aez_id", "name"]
YIELDS_HEADER = ["village_id", "year", "season", "yield_kg_ha", "maize_area_ha", "preliminary"]


def _check_header(row: Sequence[str] | None, expected: list[str], path) -> None:
    if row is None or [c.strip() for c in row] != expected:
        raise DataError(f"{path}: expected header {','.join(expected)!r}, got {row!r}")


def load_registry(villages_source, aez_source) -> VillageRegistry:
    """Load and cross-validate the village and AEZ registries.

    Raises DataError naming the offending id on duplicate villages or on a
    village whose aez_id is not present in the AEZ file.
    """
    aez_names: dict[str, str] = {}
    with open(aez_source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), AEZ_HEADER, aez_source)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{aez_source}:{lineno}: expected 2 fields, got {len(row)}")
            aez_id, name = row[0].strip(), row[1].strip()
            if aez_id in aez_names:
                raise DataError(f"{aez_source}:{lineno}: duplicate aez_id {aez_id!r}")
            aez_names[aez_id] = name

    villages: list[VillageRecord] = []
    with open(villages_source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), VILLAGES_HEADER, villages_source)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise DataError(
                    f"{villages_source}:{lineno}: expected 7 fields, got {len(row)}"
                )
            vid, name, district, province, aez_id, lon, lat = (c.strip() for c in row)
            centroid = None
            if lon and lat:
                try:
                    centroid = (float(lon), float(lat))
                except ValueError:
                    raise DataError(
                        f"{villages_source}:{lineno}: bad centroid ({lon!r}, {lat!r})"
                    ) from None
            villages.append(
                VillageRecord(vid, name, district, province, aez_id, centroid)
            )
    return VillageRegistry(villages, aez_names)


def load_yields(path, registry: VillageRegistry | None = None) -> list[SeasonalObservation]:
    """Parse and validate the seasonal yield table.

    Enforces at most one record per (village, year, season); when a registry
    is supplied, every village_id must resolve against it.
    """
    observations: list[SeasonalObservation] = []
    seen: set[tuple[str, int, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), YIELDS_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise DataError(f"{path}:{lineno}: expected 6 fields, got {len(row)}")
            vid, year_s, season_s, yield_s, area_s, prelim_s = row
            vid = vid.strip()
            if registry is not None and vid not in registry:
                raise DataError(f"{path}:{lineno}: unknown village_id {vid!r}")
            try:
                year = int(year_s)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad year {year_s!r}") from None
            season_s = season_s.strip()
            if season_s not in ("A", "B"):
                raise DataError(f"{path}:{lineno}: season must be A or B, got {season_s!r}")
            try:
                yield_mean = float(yield_s)
                maize_area = float(area_s)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: bad numeric value in {yield_s!r}/{area_s!r}"
                ) from None
            prelim_s = prelim_s.strip()
            if prelim_s not in ("0", "1"):
                raise DataError(
                    f"{path}:{lineno}: preliminary must be 0 or 1, got {prelim_s!r}"
                )
            key = (vid, year, season_s)
            if key in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate record for village {vid!r} "
                    f"{year} season {season_s}"
                )
            seen.add(key)
            try:
                observations.append(
                    SeasonalObservation(
                        vid, year, Season(season_s), yield_mean, maize_area,
                        preliminary=prelim_s == "1",
                    )
                )
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return observations


def _combine_seasons(village_id: str, year: int,
                     group: list[SeasonalObservation]) -> AnnualPoint:
    if len(group) == 1:
        obs = group[0]
        return AnnualPoint(year, obs.yield_mean, obs.preliminary, obs.maize_area, 1)
    if len(group) != 2:
        raise DataError(
            f"{village_id} {year}: {len(group)} seasonal records, expected at most 2"
        )
    total = group[0].maize_area + group[1].maize_area
    if total <= 0.0:
        raise UndefinedAnnualYieldError(village_id, year)
    value = (
        group[0].yield_mean * group[0].maize_area
        + group[1].yield_mean * group[1].maize_area
    ) / total
    preliminary = group[0].preliminary or group[1].preliminary
    return AnnualPoint(year, value, preliminary, total, 2)


def aggregate_annual(observations: Iterable[SeasonalObservation],
                     year: int) -> dict[str, AnnualPoint]:
    """Area-weighted annual mean yield per village for one calendar year.

    A village-year with a single contributing season carries that season's
    yield; the annual point is preliminary iff any contributing season was.
    Two seasons with zero total area raise UndefinedAnnualYieldError.
    """
    grouped: dict[str, list[SeasonalObservation]] = {}
    seen: set[tuple[str, Season]] = set()
    for obs in observations:
        if obs.year != year:
            continue
        key = (obs.village_id, obs.season)
        if key in seen:
            raise DataError(
                f"duplicate season {obs.season.value} for village "
                f"{obs.village_id!r} in {year}"
            )
        seen.add(key)
        grouped.setdefault(obs.village_id, []).append(obs)
    return {
        vid: _combine_seasons(vid, year, group) for vid, group in grouped.items()
    }


def build_annual_table(observations: Iterable[SeasonalObservation],
                       registry: VillageRegistry | None = None,
                       ) -> tuple[AnnualTable, DataQualityReport]:
    """Reduce seasonal observations to per-village annual series.

    Village-years whose two seasons carry zero total area are excluded and
    reported rather than failing the whole build; single-season years are
    kept and reported.
    """
    grouped: dict[str, dict[int, list[SeasonalObservation]]] = {}
    for obs in observations:
        if registry is not None and obs.village_id not in registry:
            raise DataError(f"unknown village_id {obs.village_id!r} in observations")
        years = grouped.setdefault(obs.village_id, {})
        group = years.setdefault(obs.year, [])
        for prior in group:
            if prior.season == obs.season:
                raise DataError(
                    f"duplicate season {obs.season.value} for village "
                    f"{obs.village_id!r} in {obs.year}"
                )
        group.append(obs)

    report = DataQualityReport()
    table = AnnualTable()
    for vid in sorted(grouped):
        points: list[AnnualPoint] = []
        for year in sorted(grouped[vid]):
            group = grouped[vid][year]
            try:
                point = _combine_seasons(vid, year, group)
            except UndefinedAnnualYieldError:
                report.excluded_zero_area.append((vid, year))
                continue
            if point.seasons == 1:
                report.single_season.append((vid, year))
            points.append(point)
        if points:
            table.series[vid] = AnnualYieldSeries(vid, tuple(points))
        else:
            report.villages_without_data.append(vid)
    if registry is not None:
        for vid in registry.ids():
            if vid not in grouped:
                report.villages_without_data.append(vid)
        report.villages_without_data.sort()
    return table, report


# ---------------------------------------------------------------------------
# zonal aggregation of pixel records


@dataclass(frozen=True, slots=True)
class ZonalStat:
    mean: float
    count: int


@dataclass
class ZonalReport:
    """Coverage findings from a zonal aggregation pass."""

    unknown_records: int = 0
    unknown_ids: list[str] = field(default_factory=list)
    empty_villages: list[str] = field(default_factory=list)


class _ZonalAccumulator:
    """Single-pass (sum, count) reducer; merging partitions is associative."""

    def __init__(self, registry: VillageRegistry):
        self.registry = registry
        self.sums: dict[str, float] = {}
        self.counts: dict[str, int] = {}
        self.unknown_records = 0
        self.unknown_ids: set[str] = set()

    def add(self, village_id: str, value: float) -> None:
        if not math.isfinite(value) or value < 0:
            raise DataError(f"pixel yield must be finite and >= 0, got {value}")
        if village_id not in self.registry:
            self.unknown_records += 1
            self.unknown_ids.add(village_id)
            return
        self.sums[village_id] = self.sums.get(village_id, 0.0) + value
        self.counts[village_id] = self.counts.get(village_id, 0) + 1

    def add_bulk(self, village_id: str, total: float, count: int) -> None:
        if count == 0:
            return
        if village_id not in self.registry:
            self.unknown_records += count
            self.unknown_ids.add(village_id)
            return
        self.sums[village_id] = self.sums.get(village_id, 0.0) + total
        self.counts[village_id] = self.counts.get(village_id, 0) + count

    def finish(self) -> tuple[dict[str, ZonalStat], ZonalReport]:
        stats = {
            vid: ZonalStat(self.sums[vid] / self.counts[vid], self.counts[vid])
            for vid in sorted(self.sums)
        }
        report = ZonalReport(
            unknown_records=self.unknown_records,
            unknown_ids=sorted(self.unknown_ids),
            empty_villages=[vid for vid in self.registry.ids() if vid not in stats],
        )
        return stats, report


def zonal_aggregate(pixels: Iterable[PixelRecord],
                    registry: VillageRegistry) -> tuple[dict[str, ZonalStat], ZonalReport]:
    """Reduce a pixel stream to per-village mean yield and pixel count.

    Records with unknown village ids are skipped and counted; villages with
    no pixels are absent from the output and listed in the coverage report.
    """
    acc = _ZonalAccumulator(registry)
    for px in pixels:
        acc.add(px.village_id, px.yield_value)
    return acc.finish()


def zonal_aggregate_file(path, registry: VillageRegistry,
                         chunk_records: int = 1_000_000,
                         ) -> tuple[dict[str, ZonalStat], ZonalReport]:
    """Stream a pixel file (binary or CSV) through the zonal reducer.

    The binary layout is processed in fixed-size chunks so files larger than
    memory aggregate in one pass.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == PIXEL_MAGIC:
        return _zonal_aggregate_binary(path, registry, chunk_records)
    return _zonal_aggregate_csv(path, registry)


def _zonal_aggregate_csv(path, registry):
    acc = _ZonalAccumulator(registry)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ["village_id", "yield_kg_ha"], path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                value = float(row[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad yield {row[1]!r}") from None
            try:
                acc.add(row[0].strip(), value)
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return acc.finish()


_RECORD_DTYPE = np.dtype([("idx", "<u4"), ("value", "<f4")])


def _zonal_aggregate_binary(path, registry, chunk_records):
    acc = _ZonalAccumulator(registry)
    with open(path, "rb") as fh:
        header = fh.read(5)
        if len(header) != 5 or header[:4] != PIXEL_MAGIC:
            raise DataError(f"{path}: not a pixel file (bad magic)")
        if header[4] != PIXEL_VERSION:
            raise DataError(f"{path}: unsupported pixel format version {header[4]}")
        raw = fh.read(8)
        if len(raw) != 8:
            raise DataError(f"{path}: truncated record count")
        (n_records,) = struct.unpack("<Q", raw)
        raw = fh.read(4)
        if len(raw) != 4:
            raise DataError(f"{path}: truncated id dictionary")
        (n_ids,) = struct.unpack("<I", raw)
        ids: list[str] = []
        for _ in range(n_ids):
            raw = fh.read(4)
            if len(raw) != 4:
                raise DataError(f"{path}: truncated id dictionary")
            (length,) = struct.unpack("<I", raw)
            data = fh.read(length)
            if len(data) != length:
                raise DataError(f"{path}: truncated id dictionary")
            ids.append(data.decode("utf-8"))

        sums = np.zeros(n_ids, dtype=np.float64)
        counts = np.zeros(n_ids, dtype=np.int64)
        remaining = n_records
        while remaining > 0:
            take = min(chunk_records, remaining)
            buf = fh.read(take * _RECORD_DTYPE.itemsize)
            if len(buf) != take * _RECORD_DTYPE.itemsize:
                raise DataError(f"{path}: truncated records ({remaining} outstanding)")
            chunk = np.frombuffer(buf, dtype=_RECORD_DTYPE)
            idx = chunk["idx"]
            values = chunk["value"].astype(np.float64)
            if idx.size and int(idx.max()) >= n_ids:
                raise DataError(f"{path}: village index {int(idx.max())} out of range")
            if not np.isfinite(values).all() or (values < 0).any():
                raise DataError(f"{path}: pixel yields must be finite and >= 0")
            sums += np.bincount(idx, weights=values, minlength=n_ids)
            counts += np.bincount(idx, minlength=n_ids)
            remaining -= take
        if fh.read(1):
            raise DataError(f"{path}: trailing bytes after {n_records} records")

    for i, vid in enumerate(ids):
        acc.add_bulk(vid, float(sums[i]), int(counts[i]))
    return acc.finish()


def _write_pixel_header(fh, village_ids: Sequence[str], n_records: int) -> None:
    fh.write(PIXEL_MAGIC)
    fh.write(bytes([PIXEL_VERSION]))
    fh.write(struct.pack("<Q", n_records))
    fh.write(struct.pack("<I", len(village_ids)))
    for vid in village_ids:
        data = vid.encode("utf-8")
        fh.write(struct.pack("<I", len(data)))
        fh.write(data)


def write_pixel_file(path, village_ids: Sequence[str],
                     pixels: Iterable[tuple[int, float]],
                     n_records: int) -> None:
    """Write the binary pixel format from an iterable of (index, yield).

    Layout: magic "YTPX", version byte 0x01, little-endian u64 record count,
    id dictionary (u32 id count, then per id a u32 byte length and UTF-8
    bytes), then n_records of (u32 village index, f32 yield).
    """
    with open(path, "wb") as fh:
        _write_pixel_header(fh, village_ids, n_records)
        buffer = np.empty(min(n_records, 1_000_000), dtype=_RECORD_DTYPE)
        filled = 0
        written = 0
        for idx, value in pixels:
            buffer[filled] = (idx, value)
            filled += 1
            if filled == buffer.shape[0]:
                fh.write(buffer.tobytes())
                written += filled
                filled = 0
        if filled:
            fh.write(buffer[:filled].tobytes())
            written += filled
        if written != n_records:
            raise DataError(
                f"pixel writer: declared {n_records} records but wrote {written}"
            )


def write_pixel_arrays(path, village_ids: Sequence[str], indices, values,
                       chunk_records: int = 4_000_000) -> None:
    """Write the binary pixel format from parallel index/value arrays."""
    indices = np.ascontiguousarray(indices, dtype=np.uint32)
    values = np.ascontiguousarray(values, dtype=np.float32)
    if indices.shape != values.shape or indices.ndim != 1:
        raise DataError("indices and values must be parallel 1-d arrays")
    if indices.size and int(indices.max()) >= len(village_ids):
        raise DataError("pixel index out of range of the id dictionary")
    with open(path, "wb") as fh:
        _write_pixel_header(fh, village_ids, indices.size)
        for start in range(0, indices.size, chunk_records):
            stop = min(start + chunk_records, indices.size)
            chunk = np.empty(stop - start, dtype=_RECORD_DTYPE)
            chunk["idx"] = indices[start:stop]
            chunk["value"] = values[start:stop]
            fh.write(chunk.tobytes())


def read_pixel_file(path) -> Iterable[PixelRecord]:
    """Yield PixelRecords from a binary pixel file (for small-scale use)."""
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(5)
        if len(header) != 5 or header[:4] != PIXEL_MAGIC or header[4] != PIXEL_VERSION:
            raise DataError(f"{path}: not a supported pixel file")
        (n_records,) = struct.unpack("<Q", fh.read(8))
        (n_ids,) = struct.unpack("<I", fh.read(4))
        ids = []
        for _ in range(n_ids):
            (length,) = struct.unpack("<I", fh.read(4))
            ids.append(fh.read(length).decode("utf-8"))
        for _ in range(n_records):
            raw = fh.read(8)
            if len(raw) != 8:
                raise DataError(f"{path}: truncated records")
            idx, value = struct.unpack("<If", raw)
            if idx >= n_ids:
                raise DataError(f"{path}: village index {idx} out of range")
            yield PixelRecord(ids[idx], float(value))
