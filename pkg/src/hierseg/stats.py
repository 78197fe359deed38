"""Exact sufficient statistics for pixel clusters.

Every error value in the package derives from the three integer fields kept
here: pixel count, per-channel intensity sums, and the summed squared norm of
the pixel vectors.  Keeping them as exact integers makes cluster merging
bit-exact reversible and free of accumulation drift; only derived quantities
(cluster error, merge increment, standard deviation) are floating point.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "ClusterStats",
    "EMPTY_STATS",
    "stats_of_pixels",
    "merge_stats",
    "subtract_stats",
    "cluster_error",
    "merge_increment",
    "sigma_from_error",
]


@dataclass(frozen=True, slots=True)
class ClusterStats:
    """Sufficient statistics of a pixel cluster.

    n      -- pixel count
    sums   -- per-channel integer sum of pixel intensities
    sumsq  -- integer sum over pixels of the squared Euclidean norm
    """

    n: int
    sums: tuple[int, ...]
    sumsq: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("pixel count must be non-negative")
        if self.n == 0 and (any(self.sums) or self.sumsq != 0):
            raise ValueError("an empty cluster must have zero sums")

    @property
    def channels(self) -> int:
        return len(self.sums)

    def mean(self) -> tuple[float, ...]:
        if self.n == 0:
            raise ValueError("an empty cluster has no mean")
        return tuple(s / self.n for s in self.sums)


#: Identity element of merge_stats; matches any channel count.
EMPTY_STATS = ClusterStats(0, (), 0)


def stats_of_pixels(pixels: Iterable[Sequence[int] | int]) -> ClusterStats:
    """Accumulate exact statistics over pixel intensity vectors.

    Pixels are sequences of integer samples (or bare integers for a single
    grayscale channel); all pixels must carry the same channel count.
    """
    n = 0
    sums: list[int] | None = None
    sumsq = 0
    for px in pixels:
        vals = (px,) if isinstance(px, (int,)) or not hasattr(px, "__len__") else tuple(px)
        if sums is None:
            sums = [0] * len(vals)
        elif len(vals) != len(sums):
            raise ValueError(
                f"pixel with {len(vals)} channels in a {len(sums)}-channel cluster"
            )
        for i, v in enumerate(vals):
            v = operator.index(v)
            sums[i] += v
            sumsq += v * v
        n += 1
    if sums is None:
        return EMPTY_STATS
    return ClusterStats(n, tuple(sums), sumsq)


def merge_stats(a: ClusterStats, b: ClusterStats) -> ClusterStats:
    """Statistics of the disjoint union: componentwise exact sums."""
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    if a.channels != b.channels:
        raise ValueError(f"channel count mismatch: {a.channels} vs {b.channels}")
    return ClusterStats(
        a.n + b.n,
        tuple(x + y for x, y in zip(a.sums, b.sums)),
        a.sumsq + b.sumsq,
    )


def subtract_stats(total: ClusterStats, part: ClusterStats) -> ClusterStats:
    """Exact inverse of merge_stats: recover the other operand of a union."""
    if part.n == 0:
        return total
    if total.channels != part.channels:
        raise ValueError(f"channel count mismatch: {total.channels} vs {part.channels}")
    n = total.n - part.n
    if n < 0:
        raise ValueError("part has more pixels than the total")
    if n == 0:
        if total.sums != part.sums or total.sumsq != part.sumsq:
            raise ValueError("part does not match the total it claims to exhaust")
        return EMPTY_STATS
    return ClusterStats(
        n,
        tuple(x - y for x, y in zip(total.sums, part.sums)),
        total.sumsq - part.sumsq,
    )


def cluster_error(s: ClusterStats) -> float:
    """Total squared deviation of the cluster's pixels from the cluster mean.

    Uses the closed form sumsq - ||sums||^2 / n, evaluated from exact integers
    as (n * sumsq - ||sums||^2) / n so the numerator is a non-negative integer
    (Cauchy-Schwarz) and the only rounding is one float division.
    """
    if s.n <= 1:
        return 0.0
    num = s.n * s.sumsq - sum(v * v for v in s.sums)
    if num < 0:
        raise ValueError("inconsistent statistics: negative scatter")
    return num / s.n


def merge_increment(a: ClusterStats, b: ClusterStats) -> float:
    """Error increase from uniting two non-empty clusters.

    n_a * n_b / (n_a + n_b) * ||mean_a - mean_b||^2, evaluated as a ratio of
    exact integers so the result is symmetric in its arguments to the last bit
    and equals cluster_error(union) - cluster_error(a) - cluster_error(b).
    """
    if a.n == 0 or b.n == 0:
        raise ValueError("merge increment is undefined for empty clusters")
    if a.channels != b.channels:
        raise ValueError(f"channel count mismatch: {a.channels} vs {b.channels}")
    num = 0
    for sa, sb in zip(a.sums, b.sums):
        d = sa * b.n - sb * a.n
        num += d * d
    return num / (a.n * b.n * (a.n + b.n))


def sigma_from_error(error: float, n: int, channels: int) -> float:
    """Standard deviation of a piecewise-constant approximation.

    Inverts error = channels * n * sigma^2.
    """
    if n < 1:
        raise ValueError("sigma needs at least one pixel")
    if error < 0:
        raise ValueError("negative approximation error")
    return math.sqrt(error / (channels * n))
