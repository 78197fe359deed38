"""Unconstrained Ward clustering over weighted clusters.

At every step the pair of clusters with the minimal error increment is
merged.  The merge set is found with the nearest-neighbor chain algorithm
(O(n^2) time, O(n) memory, no cached distance matrix: costs are evaluated
directly from cluster statistics), then linearized into ascending-cost order,
which is a valid merge order because Ward admits no inversions.
"""

from __future__ import annotations

import heapq

import numpy as np

from .hierarchy import Hierarchy, build_from_merges
from .stats import ClusterStats

__all__ = ["ward_cluster", "ward_merge_order"]


def ward_cluster(items: list[ClusterStats], pixel_ids=None) -> Hierarchy:
    """Ward hierarchy over the items (single pixels or whole clusters).

    The result is convex: merge costs are non-decreasing in rank order.
    Identical inputs produce identical hierarchies; cost ties resolve toward
    smaller node ids.
    """
    if not items:
        raise ValueError("cannot cluster an empty item list")
    channels = items[0].channels
    for s in items:
        if s.n < 1:
            raise ValueError("items must be non-empty clusters")
        if s.channels != channels:
            raise ValueError("items must share one channel count")
    k = len(items)
    if k == 1:
        return build_from_merges(items, [], pixel_ids)
    n = np.array([s.n for s in items], dtype=np.float64)
    sums = np.array([s.sums for s in items], dtype=np.float64)
    merges = ward_merge_order(n, sums)
    return build_from_merges(items, merges, pixel_ids)


def ward_merge_order(n: np.ndarray, sums: np.ndarray) -> list[tuple[int, int]]:
    """Ward merge pairs in canonical (ascending cost, topological) order.

    ``n`` holds item weights, ``sums`` the per-channel intensity sums; node
    ids follow the build_from_merges convention (items 0..k-1, the j-th
    emitted merge creates node k+j).
    """
    k = len(n)
    m = 2 * k - 1
    w = np.empty(m, dtype=np.float64)
    mu = np.empty((m, sums.shape[1]), dtype=np.float64)
    w[:k] = n
    mu[:k] = sums / n[:, None]
    active = np.zeros(m, dtype=bool)
    active[:k] = True

    # raw[j] = (cost, tmp_left, tmp_right) in chain discovery order
    raw: list[tuple[float, int, int]] = []
    chain: list[int] = []
    next_id = k
    while next_id < m:
        if not chain:
            chain.append(int(np.flatnonzero(active)[0]))
        top = chain[-1]
        d = _increments(w, mu, active, top, next_id)
        nn = int(np.argmin(d))
        if len(chain) >= 2 and nn == chain[-2]:
            a, b = chain.pop(), chain.pop()
            u, v = min(a, b), max(a, b)
            raw.append((float(d[nn]), u, v))
            active[u] = active[v] = False
            w[next_id] = w[u] + w[v]
            mu[next_id] = (w[u] * mu[u] + w[v] * mu[v]) / w[next_id]
            active[next_id] = True
            next_id += 1
        else:
            chain.append(nn)

    return _linearize(raw, k)


def _increments(w, mu, active, top, hi):
    """Merge increments from ``top`` to every other active node (inf elsewhere)."""
    d = np.full(hi, np.inf)
    idx = np.flatnonzero(active[:hi])
    sq = ((mu[idx] - mu[top]) ** 2).sum(axis=1)
    d[idx] = (w[idx] * w[top] / (w[idx] + w[top])) * sq
    d[top] = np.inf
    return d


def _linearize(raw: list[tuple[float, int, int]], k: int) -> list[tuple[int, int]]:
    """Order chain-discovered merges by ascending cost, children first.

    A heap keyed by (cost, discovery index) pops only merges whose children
    already exist, so tolerance-level cost ties cannot produce an invalid
    order.  Temporary ids are rewritten to final build ids.
    """
    n_merges = len(raw)
    made_by = {k + j: j for j in range(n_merges)}  # tmp id -> raw index
    pending = [0] * n_merges
    dependents: list[list[int]] = [[] for _ in range(n_merges)]
    for j, (_, u, v) in enumerate(raw):
        for x in (u, v):
            if x >= k:
                pending[j] += 1
                dependents[made_by[x]].append(j)
    heap = [(c, j) for j, (c, _, _) in enumerate(raw) if pending[j] == 0]
    heapq.heapify(heap)
    final_id = {i: i for i in range(k)}
    merges: list[tuple[int, int]] = []
    while heap:
        _, j = heapq.heappop(heap)
        cost, u, v = raw[j]
        fu, fv = final_id[u], final_id[v]
        merges.append((min(fu, fv), max(fu, fv)))
        final_id[k + j] = k + len(merges) - 1
        for dep in dependents[j]:
            pending[dep] -= 1
            if pending[dep] == 0:
                heapq.heappush(heap, (raw[dep][0], dep))
    assert len(merges) == n_merges
    return merges
