"""Synthetic village-yield dataset generator.

Produces a complete, self-consistent input set (villages, AEZs, seasonal
yields, square village boundaries, optionally a pixel file) so the whole
pipeline and test suite run without external downloads. Every draw comes from
a single seeded PCG64 stream, so a (seed, parameters) pair always yields
byte-identical files.

The yield process per village: a lognormal base level, a Gaussian trend slope
applied over the observed years, and Gaussian year noise. Each observed year
2019-2023 is split into two seasons whose area-weighted mean reproduces the
annual value exactly; 2024 has only Season A, flagged preliminary.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import write_pixel_arrays


@dataclass(frozen=True)
class SynthParams:
    n_villages: int = 1000
    seed: int = 0
    first_year: int = 2019
    last_year: int = 2024  # written as a preliminary single-season year
    n_aez: int = 8
    base_log_mean: float = math.log(1300.0)
    base_log_sd: float = 0.30
    slope_mean: float = 30.0
    slope_sd: float = 55.0
    noise_sd: float = 60.0
    pixels_per_village: int = 0  # 0 disables the pixel file
    pixel_noise_sd: float = 700.0

    def __post_init__(self):
        if self.n_villages < 1:
            raise ValueError("n_villages must be >= 1")
        if self.first_year >= self.last_year:
            raise ValueError("need first_year < last_year")
        if self.n_aez < 1:
            raise ValueError("n_aez must be >= 1")


_PROVINCES = ["Kigali", "North", "South", "East", "West"]


def generate_dataset(out_dir, params: SynthParams = SynthParams()) -> dict:
    """Write a synthetic dataset into out_dir; returns a summary dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(params.seed))

    n = params.n_villages
    width = len(str(n))
    ids = [f"RW-{i + 1:0{max(width, 4)}d}" for i in range(n)]
    aez_ids = [f"Z{z + 1:02d}" for z in range(params.n_aez)]
    village_aez = rng.integers(0, params.n_aez, size=n)

    cols = max(int(math.ceil(math.sqrt(n))), 1)
    lon0, lat0, step = 29.0, -2.6, 0.018

    with open(out / "aez.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["aez_id", "name"])
        for z, aez_id in enumerate(aez_ids):
            writer.writerow([aez_id, f"Agro-ecological zone {z + 1}"])

    centroids = []
    with open(out / "villages.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["village_id", "name", "district", "province", "aez_id", "lon", "lat"])
        for i, vid in enumerate(ids):
            lon = lon0 + (i % cols) * step
            lat = lat0 + (i // cols) * step
            centroids.append((lon, lat))
            writer.writerow([
                vid,
                f"Village {i + 1}",
                f"District {(i % 30) + 1:02d}",
                _PROVINCES[i % len(_PROVINCES)],
                aez_ids[village_aez[i]],
                repr(lon),
                repr(lat),
            ])

    observed_years = list(range(params.first_year, params.last_year + 1))
    n_years = len(observed_years)
    base = np.exp(rng.normal(params.base_log_mean, params.base_log_sd, size=n))
    base = np.clip(base, 300.0, 4000.0)
    slope = rng.normal(params.slope_mean, params.slope_sd, size=n)
    noise = rng.normal(0.0, params.noise_sd, size=(n, n_years))
    annual = np.maximum(
        base[:, None] + slope[:, None] * (np.arange(n_years)[None, :]) + noise,
        50.0,
    )

    area_a = np.round(rng.uniform(1.2, 3.0, size=(n, n_years)), 3)
    area_b = np.round(rng.uniform(0.6, 2.0, size=(n, n_years)), 3)
    split = rng.uniform(-0.10, 0.10, size=(n, n_years))

    with open(out / "yields.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["village_id", "year", "season", "yield_kg_ha",
                         "maize_area_ha", "preliminary"])
        for i, vid in enumerate(ids):
            for j, year in enumerate(observed_years):
                value = annual[i, j]
                if year == params.last_year:
                    writer.writerow([vid, year, "A", repr(float(value)),
                                     repr(float(area_a[i, j])), "1"])
                    continue
                # choose the A/B split so the area-weighted mean is exactly
                # the annual value
                offset = split[i, j] * value
                y_b = value - offset * area_a[i, j] / area_b[i, j]
                if y_b < 0:
                    offset = 0.0
                    y_b = value
                y_a = value + offset
                writer.writerow([vid, year, "A", repr(float(y_a)),
                                 repr(float(area_a[i, j])), "0"])
                writer.writerow([vid, year, "B", repr(float(y_b)),
                                 repr(float(area_b[i, j])), "0"])

    half = step * 0.45
    features = []
    for i, vid in enumerate(ids):
        lon, lat = centroids[i]
        ring = [
            [lon - half, lat - half],
            [lon + half, lat - half],
            [lon + half, lat + half],
            [lon - half, lat + half],
            [lon - half, lat - half],
        ]
        features.append(
            {
                "type": "Feature",
                "properties": {"village_id": vid, "name": f"Village {i + 1}"},
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }
        )
    with open(out / "boundaries.geojson", "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)
        fh.write("\n")

    summary = {
        "villages": n,
        "aez": params.n_aez,
        "years": [params.first_year, params.last_year],
        "seed": params.seed,
    }

    if params.pixels_per_village > 0:
        counts = rng.integers(
            max(params.pixels_per_village // 2, 1),
            params.pixels_per_village * 3 // 2 + 1,
            size=n,
        )
        total = int(counts.sum())
        indices = np.repeat(np.arange(n, dtype=np.uint32), counts)
        values = np.maximum(
            np.repeat(annual[:, -1], counts)
            + rng.normal(0.0, params.pixel_noise_sd, size=total),
            0.0,
        )
        write_pixel_arrays(out / "pixels.bin", ids, indices, values)
        summary["pixels"] = total

    return summary
