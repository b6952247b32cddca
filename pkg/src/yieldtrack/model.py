"""Core domain records: villages, seasonal observations, annual series.

All yields are kg/ha and all areas are hectares, stored as 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import DataError


class Season(str, Enum):
    A = "A"  # September - February
    B = "B"  # March - June


@dataclass(frozen=True, slots=True)
class VillageRecord:
    """One village with its administrative lineage and agro-ecological zone."""

    village_id: str
    name: str
    district: str
    province: str
    aez_id: str
    centroid: tuple[float, float] | None = None  # (lon, lat), degrees


@dataclass(frozen=True, slots=True)
class SeasonalObservation:
    """Mean yield and cultivated maize area for one (village, year, season)."""

    village_id: str
    year: int
    season: Season
    yield_mean: float
    maize_area: float
    preliminary: bool = False

    def __post_init__(self):
        if not math.isfinite(self.yield_mean) or self.yield_mean < 0:
            raise DataError(
                f"{self.village_id} {self.year}{self.season.value}: "
                f"yield must be finite and >= 0, got {self.yield_mean}"
            )
        if not math.isfinite(self.maize_area) or self.maize_area < 0:
            raise DataError(
                f"{self.village_id} {self.year}{self.season.value}: "
                f"maize area must be finite and >= 0, got {self.maize_area}"
            )


@dataclass(frozen=True, slots=True)
class AnnualPoint:
    """Area-weighted annual yield for one village-year."""

    year: int
    value: float
    preliminary: bool
    area: float  # total maize area across contributing seasons
    seasons: int  # number of contributing seasons


@dataclass(frozen=True)
class AnnualYieldSeries:
    """Ordered annual yields for one village; years strictly increasing."""

    village_id: str
    points: tuple[AnnualPoint, ...]

    def __post_init__(self):
        years = [p.year for p in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise DataError(
                f"{self.village_id}: series years must be strictly increasing, got {years}"
            )
        for p in self.points:
            if not math.isfinite(p.value) or p.value < 0:
                raise DataError(
                    f"{self.village_id} {p.year}: annual yield must be finite and >= 0"
                )

    def years(self) -> tuple[int, ...]:
        return tuple(p.year for p in self.points)

    def value_at(self, year: int) -> float | None:
        for p in self.points:
            if p.year == year:
                return p.value
        return None

    def point_at(self, year: int) -> AnnualPoint | None:
        for p in self.points:
            if p.year == year:
                return p
        return None


@dataclass(frozen=True, slots=True)
class PixelRecord:
    """One predicted-yield pixel attributed to a village."""

    village_id: str
    yield_value: float


class VillageRegistry:
    """Validated lookup of villages and their agro-ecological zones.

    Rejects duplicate village ids and villages whose aez_id does not resolve.
    """

    def __init__(self, villages: Iterable[VillageRecord], aez_names: Mapping[str, str]):
        self._aez = dict(aez_names)
        self._villages: dict[str, VillageRecord] = {}
        for rec in villages:
            if rec.village_id in self._villages:
                raise DataError(f"duplicate village_id {rec.village_id!r}")
            if rec.aez_id not in self._aez:
                raise DataError(
                    f"village {rec.village_id!r} references unknown AEZ {rec.aez_id!r}"
                )
            self._villages[rec.village_id] = rec

    def __len__(self) -> int:
        return len(self._villages)

    def __contains__(self, village_id: str) -> bool:
        return village_id in self._villages

    def __iter__(self) -> Iterator[VillageRecord]:
        for vid in self.ids():
            yield self._villages[vid]

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._villages))

    def get(self, village_id: str) -> VillageRecord:
        try:
            return self._villages[village_id]
        except KeyError:
            raise DataError(f"unknown village_id {village_id!r}") from None

    def aez_of(self, village_id: str) -> str:
        return self.get(village_id).aez_id

    def aez_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._aez))

    def aez_name(self, aez_id: str) -> str:
        try:
            return self._aez[aez_id]
        except KeyError:
            raise DataError(f"unknown aez_id {aez_id!r}") from None

    def villages_in_aez(self, aez_id: str) -> tuple[str, ...]:
        if aez_id not in self._aez:
            raise DataError(f"unknown aez_id {aez_id!r}")
        return tuple(
            sorted(vid for vid, rec in self._villages.items() if rec.aez_id == aez_id)
        )


@dataclass
class AnnualTable:
    """Per-village annual yield series, iterated in sorted village-id order."""

    series: dict[str, AnnualYieldSeries] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.series)

    def __contains__(self, village_id: str) -> bool:
        return village_id in self.series

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.series))

    def get(self, village_id: str) -> AnnualYieldSeries:
        return self.series[village_id]

    def years(self) -> tuple[int, ...]:
        seen: set[int] = set()
        for s in self.series.values():
            seen.update(p.year for p in s.points)
        return tuple(sorted(seen))

    def values_at(self, year: int) -> dict[str, float]:
        """Annual yield per village for one calendar year (villages with data)."""
        out: dict[str, float] = {}
        for vid in sorted(self.series):
            v = self.series[vid].value_at(year)
            if v is not None:
                out[vid] = v
        return out


@dataclass
class DataQualityReport:
    """Non-fatal findings collected while building the annual table."""

    single_season: list[tuple[str, int]] = field(default_factory=list)
    excluded_zero_area: list[tuple[str, int]] = field(default_factory=list)
    villages_without_data: list[str] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {
            "single_season_years": len(self.single_season),
            "excluded_zero_area_years": len(self.excluded_zero_area),
            "villages_without_data": len(self.villages_without_data),
        }
