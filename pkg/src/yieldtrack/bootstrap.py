"""Bootstrap diagnostics for pixel-level model error under aggregation.

Quantifies how much per-pixel prediction error survives averaging to the
village level: resampled aggregate error for a given draw size, and
convergence-of-the-running-mean curves over a shuffled pixel stream.

Randomness comes from numpy's PCG64 generator so runs are reproducible from
a single integer seed; replicate r draws from the stream seeded by
SeedSequence((seed, r)), which keeps replicates independent of execution
order and of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class BootstrapResult:
    """Aggregate-error summary over bootstrap replicates.

    mean_abs_error is the average absolute replicate mean; stdev is the
    dispersion of the replicate means. Both are emitted because "aggregate
    error" is quoted either way; lo/hi are the 2.5th/97.5th percentiles of
    the replicate means.
    """

    draw_size: int
    replicates: int
    seed: int
    mean_abs_error: float
    stdev: float
    lo: float
    hi: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.draw_size,
            "replicates": self.replicates,
            "seed": self.seed,
            "mean_abs_error": self.mean_abs_error,
            "stdev": self.stdev,
            "lo": self.lo,
            "hi": self.hi,
        }


def bootstrap_aggregate_error(residuals, draw_size: int, replicates: int,
                              seed: int = 0) -> BootstrapResult:
    """Bootstrap the mean of `draw_size` residuals, `replicates` times.

    Each replicate draws with replacement from the residual pool and records
    the draw mean. Deterministic for a fixed seed.
    """
    pool = np.asarray(residuals, dtype=np.float64)
    if pool.size == 0:
        raise DataError("residual pool is empty")
    if draw_size < 1:
        raise ValueError(f"draw size must be >= 1, got {draw_size}")
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    means = np.empty(replicates)
    for r in range(replicates):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, r))))
        idx = rng.integers(0, pool.size, size=draw_size)
        means[r] = pool[idx].mean()
    lo, hi = np.percentile(means, [2.5, 97.5])
    return BootstrapResult(
        draw_size=draw_size,
        replicates=replicates,
        seed=seed,
        mean_abs_error=float(np.abs(means).mean()),
        stdev=float(means.std()),
        lo=float(lo),
        hi=float(hi),
    )


@dataclass(frozen=True)
class ConvergenceCurve:
    """Running means over a shuffled residual stream.

    n_star is the first sample count from which every later running mean
    stays within tolerance of the final mean; converged is False when that
    only happens at the very end of the stream.
    """

    sample_sizes: tuple[int, ...]
    running_means: tuple[float, ...]
    n_star: int
    tolerance: float
    converged: bool


def convergence_curve(residuals, max_n: int | None = None,
                      tolerance: float = 40.0, seed: int = 0) -> ConvergenceCurve:
    """Running mean of the first n shuffled residuals, for n = 1..max_n."""
    pool = np.asarray(residuals, dtype=np.float64)
    if pool.size == 0:
        raise DataError("residual pool is empty")
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    if max_n is None:
        max_n = pool.size
    if not 1 <= max_n <= pool.size:
        raise ValueError(
            f"max_n must lie in 1..{pool.size} (single shuffled pass), got {max_n}"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    shuffled = pool[rng.permutation(pool.size)][:max_n]
    counts = np.arange(1, max_n + 1, dtype=np.float64)
    running = np.cumsum(shuffled) / counts
    final = running[-1]
    within = np.abs(running - final) <= tolerance
    # first n from which the suffix stays inside the tolerance band
    suffix_ok = np.logical_and.accumulate(within[::-1])[::-1]
    n_star = int(np.argmax(suffix_ok)) + 1  # suffix_ok[-1] is always True
    return ConvergenceCurve(
        sample_sizes=tuple(range(1, max_n + 1)),
        running_means=tuple(float(v) for v in running),
        n_star=n_star,
        tolerance=tolerance,
        converged=n_star < max_n,
    )


def gaussian_residual_pool(sigma: float, size: int, seed: int = 0) -> np.ndarray:
    """Synthesized zero-mean Gaussian residuals for demonstration runs."""
    if sigma < 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be finite and >= 0, got {sigma}")
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.normal(0.0, sigma, size=size)


def load_residuals_csv(path) -> np.ndarray:
    """Read residuals from a CSV with a residual_kg_ha column."""
    import csv

    values: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or "residual_kg_ha" not in [c.strip() for c in header]:
            raise DataError(f"{path}: expected a residual_kg_ha column")
        col = [c.strip() for c in header].index("residual_kg_ha")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values.append(float(row[col]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: bad residual value") from None
    if not values:
        raise DataError(f"{path}: no residuals found")
    arr = np.asarray(values)
    if not np.isfinite(arr).all():
        raise DataError(f"{path}: residuals must be finite")
    return arr
