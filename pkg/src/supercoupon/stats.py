"""Monte Carlo summaries and distribution comparisons."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats as sps

from .errors import ValidationError


def _as_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValidationError("need at least one sample")
    return arr


@dataclass(frozen=True)
class McSummary:
    reps: int
    mean: float
    stderr: float
    min: float
    max: float
    low_reps: bool = False  # a single replication: stderr is reported as 0


def summarize(samples) -> McSummary:
    """Mean with standard error ``sd / sqrt(reps)`` (unbiased variance)."""
    arr = _as_samples(samples)
    reps = arr.size
    mean = float(arr.mean())
    lo, hi = float(arr.min()), float(arr.max())
    # summation rounding can push the mean of near-constant data past an extreme
    mean = min(max(mean, lo), hi)
    if reps == 1:
        return McSummary(1, mean, 0.0, lo, hi, low_reps=True)
    stderr = float(arr.std(ddof=1) / np.sqrt(reps))
    return McSummary(reps, mean, stderr, lo, hi)


@dataclass(frozen=True)
class EcdfTable:
    values: np.ndarray     # distinct sample values, ascending
    fractions: np.ndarray  # fraction of samples <= each value


def ecdf(samples) -> EcdfTable:
    arr = np.sort(_as_samples(samples))
    values, counts = np.unique(arr, return_counts=True)
    return EcdfTable(values, np.cumsum(counts) / arr.size)


def ks_distance(samples, cdf: Callable) -> float:
    """Sup-distance between the empirical CDF of ``samples`` and ``cdf``.

    Both one-sided gaps are taken at every sample point, which also handles
    tied samples (the empirical CDF jumps by the full tie mass there).
    """
    arr = _as_samples(samples)
    return float(sps.kstest(arr, cdf).statistic)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def histogram(samples, bin_count: int) -> Histogram:
    """Equal-width bins over ``[min, max]`` with densities integrating to 1."""
    if bin_count < 1:
        raise ValidationError(f"bin_count must be >= 1, got {bin_count}")
    arr = _as_samples(samples)
    counts, edges = np.histogram(arr, bins=bin_count)
    density = counts / (arr.size * np.diff(edges))
    return Histogram(edges, counts, density)


def quantile_pairs(samples, ppf: Callable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(p, empirical, reference)`` at plotting positions ``(i - 1/2) / N``."""
    arr = np.sort(_as_samples(samples))
    p = (np.arange(1, arr.size + 1) - 0.5) / arr.size
    return p, arr, np.asarray(ppf(p), dtype=float)
