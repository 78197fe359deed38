"""Exhaustive optimal clustering for tiny instances.

Ground truth for optimality-gap tests: set partitions are enumerated through
restricted-growth strings (canonical first-occurrence labeling, lexicographic
order), connected partitions through recursive region growing that emits each
connected subset exactly once.  Block errors come from exact integer
statistics, so reported optima carry only one float division per block.

Capacity is hard-limited to 12 items to keep the worst case within a few
million candidates.
"""

from __future__ import annotations

import numpy as np

from .hierarchy import ErrorCurve
from .stats import ClusterStats, sigma_from_error

__all__ = [
    "CapacityError",
    "optimal_partition",
    "optimal_connected_partition",
    "optimal_curve",
]

CAPACITY = 12


class CapacityError(ValueError):
    """Instance too large for exhaustive enumeration."""


def _check_items(items: list[ClusterStats]) -> int:
    n = len(items)
    if n == 0:
        raise ValueError("no items to partition")
    if n > CAPACITY:
        raise CapacityError(f"{n} items exceed the oracle capacity of {CAPACITY}")
    channels = items[0].channels
    for s in items:
        if s.n < 1 or s.channels != channels:
            raise ValueError("items must be non-empty and share one channel count")
    return n


def _block_error(n: int, sums: list[int], sumsq: int) -> float:
    if n <= 1:
        return 0.0
    return (n * sumsq - sum(s * s for s in sums)) / n


def _enumerate_partitions(items: list[ClusterStats], want_g: int | None):
    """Yield (g, E, assignment tuple) for every canonical set partition.

    With want_g set, branches that cannot reach exactly want_g blocks are
    pruned.
    """
    n = len(items)
    ns = [s.n for s in items]
    sums = [list(s.sums) for s in items]
    sqs = [s.sumsq for s in items]
    c = items[0].channels

    assign = [0] * n
    bn: list[int] = []
    bsums: list[list[int]] = []
    bsq: list[int] = []

    def rec(i: int):
        if i == n:
            g = len(bn)
            if want_g is None or g == want_g:
                e = sum(_block_error(bn[b], bsums[b], bsq[b]) for b in range(g))
                yield g, e, tuple(assign)
            return
        used = len(bn)
        limit = used + 1
        if want_g is not None:
            if used + (n - i) < want_g:
                return
            limit = min(limit, want_g)
        for b in range(limit):
            assign[i] = b
            if b == used:
                bn.append(ns[i])
                bsums.append(list(sums[i]))
                bsq.append(sqs[i])
                yield from rec(i + 1)
                bn.pop()
                bsums.pop()
                bsq.pop()
            else:
                bn[b] += ns[i]
                for ch in range(c):
                    bsums[b][ch] += sums[i][ch]
                bsq[b] += sqs[i]
                yield from rec(i + 1)
                bn[b] -= ns[i]
                for ch in range(c):
                    bsums[b][ch] -= sums[i][ch]
                bsq[b] -= sqs[i]

    yield from rec(0)


def optimal_partition(items: list[ClusterStats], g: int):
    """Minimum-error partition of the items into exactly g blocks.

    Returns (assignment, E).  The assignment is canonical (block numbers in
    order of first occurrence); ties keep the lexicographically smallest one.
    """
    n = _check_items(items)
    if not 1 <= g <= n:
        raise ValueError(f"block count {g} outside 1..{n}")
    best_e = np.inf
    best_assign = None
    for _, e, a in _enumerate_partitions(items, g):
        if e < best_e:
            best_e = e
            best_assign = a
    return np.array(best_assign, dtype=np.int64), float(best_e)


def optimal_curve(items: list[ClusterStats], g_max: int) -> ErrorCurve:
    """Optimal E for every g in 1..g_max from one enumeration pass."""
    n = _check_items(items)
    if not 1 <= g_max <= n:
        raise ValueError(f"g_max {g_max} outside 1..{n}")
    best = np.full(n + 1, np.inf)
    for g, e, _ in _enumerate_partitions(items, None):
        if e < best[g]:
            best[g] = e
    npx = sum(s.n for s in items)
    c = items[0].channels
    gs = np.arange(1, g_max + 1, dtype=np.int64)
    errors = best[1:g_max + 1]
    sigmas = np.array([sigma_from_error(max(e, 0.0), npx, c) for e in errors])
    return ErrorCurve(g=gs, error=errors, sigma=sigmas)


# -- adjacency-constrained oracle ----------------------------------------------


def optimal_connected_partition(image, g: int):
    """Minimum-error partition of a raster into exactly g 4-connected regions.

    Returns (labels, E) with labels in row-major pixel order, canonically
    numbered by each region's smallest pixel.
    """
    w, h = image.width, image.height
    n = w * h
    if n > CAPACITY:
        raise CapacityError(f"{n} pixels exceed the oracle capacity of {CAPACITY}")
    if not 1 <= g <= n:
        raise ValueError(f"region count {g} outside 1..{n}")
    px = image.pixel_rows().astype(np.int64)
    c = image.channels
    adj = [set() for _ in range(n)]
    for i in range(n):
        if (i + 1) % w:
            adj[i].add(i + 1)
            adj[i + 1].add(i)
        if i + w < n:
            adj[i].add(i + w)
            adj[i + w].add(i)

    def region_error(region: frozenset) -> float:
        cnt = len(region)
        if cnt <= 1:
            return 0.0
        sums = [0] * c
        sq = 0
        for p in region:
            for ch in range(c):
                sums[ch] += int(px[p, ch])
            sq += int((px[p] * px[p]).sum())
        return _block_error(cnt, sums, sq)

    def connected_subsets(cur: frozenset, cand: tuple, forb: frozenset,
                          allowed: frozenset):
        """Connected supersets of cur inside allowed, each exactly once.

        cand holds the ordered extension frontier; once a branch has explored
        including a candidate, the candidate is forbidden for its siblings.
        """
        yield cur
        banned = set(forb)
        for i, v in enumerate(cand):
            rest = cand[i + 1:]
            grown = cur | {v}
            extra = tuple(
                u for u in sorted(adj[v])
                if u in allowed and u not in grown and u not in banned
                and u not in rest
            )
            yield from connected_subsets(grown, rest + extra,
                                         frozenset(banned), allowed)
            banned.add(v)

    best: list = [np.inf, None]

    def rec(unassigned: frozenset, blocks: list[frozenset], g_left: int):
        if not unassigned:
            if g_left == 0:
                e = sum(region_error(b) for b in blocks)
                if e < best[0]:
                    best[0] = e
                    best[1] = list(blocks)
            return
        if g_left == 0 or g_left > len(unassigned):
            return
        seed = min(unassigned)
        cand = tuple(sorted(x for x in adj[seed] if x in unassigned))
        for region in connected_subsets(frozenset([seed]), cand, frozenset(),
                                        unassigned):
            blocks.append(region)
            rec(unassigned - region, blocks, g_left - 1)
            blocks.pop()

    rec(frozenset(range(n)), [], g)
    if best[1] is None:
        raise RuntimeError("no connected partition found (unreachable for grids)")
    labels = np.empty(n, dtype=np.int64)
    for b, region in enumerate(sorted(best[1], key=min)):
        for p in region:
            labels[p] = b
    return labels, float(best[0])
