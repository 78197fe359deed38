"""Adjacency-constrained greedy merging over the region adjacency graph.

Both segmentation variants repeatedly merge the pair of 4-adjacent regions
with the smallest error increment (piecewise-constant Mumford-Shah style).
The conventional variant records the merges as they happen, inversions and
all.  The restructured variant performs the exact same merge sequence but
routes every union through the combined merge/restructure operation, so the
final hierarchy is convex and its clusters need not stay spatially connected.

Edge costs are recomputed from live region statistics and kept in a lazy
deletion heap keyed by (cost, min region, max region): entries whose regions
have since been merged away are skipped on pop, and ties resolve the same way
in both variants because regions are numbered identically (pixels 0..N-1,
then N+k for the k-th merge).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import heapq

from .hierarchy import REL_EPSILON, Hierarchy, build_from_merges
from .restructure import Pool, compact, join_convex
from .stats import ClusterStats, cluster_error, merge_stats

__all__ = ["AdjacencyGraph", "build_rag", "greedy_segment", "segment_restructured"]


@dataclass
class AdjacencyGraph:
    """Live regions of a partial segmentation and their adjacency sets."""

    width: int
    height: int
    neighbors: dict[int, set[int]] = field(default_factory=dict)

    @property
    def regions(self) -> set[int]:
        return set(self.neighbors)

    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for u, nbrs in self.neighbors.items():
            for v in nbrs:
                out.add((min(u, v), max(u, v)))
        return out

    def merge(self, u: int, v: int, w: int) -> set[int]:
        """Contract regions u, v into w; returns w's neighbor set."""
        if v not in self.neighbors[u]:
            raise ValueError(f"regions {u} and {v} are not adjacent")
        merged = (self.neighbors.pop(u) | self.neighbors.pop(v)) - {u, v}
        for x in merged:
            self.neighbors[x].discard(u)
            self.neighbors[x].discard(v)
            self.neighbors[x].add(w)
        self.neighbors[w] = merged
        return merged


def _grid_rag(width: int, height: int) -> AdjacencyGraph:
    if width < 1 or height < 1:
        raise ValueError("raster must contain at least one pixel")
    neighbors: dict[int, set[int]] = {i: set() for i in range(width * height)}
    for r in range(height):
        for c in range(width):
            i = r * width + c
            if c + 1 < width:
                neighbors[i].add(i + 1)
                neighbors[i + 1].add(i)
            if r + 1 < height:
                neighbors[i].add(i + width)
                neighbors[i + width].add(i)
    return AdjacencyGraph(width=width, height=height, neighbors=neighbors)


def build_rag(image) -> AdjacencyGraph:
    """One region per pixel (row-major ids), edges under 4-connectivity."""
    return _grid_rag(image.width, image.height)


def _pixel_leaf_stats(image) -> list[ClusterStats]:
    px = image.pixels.reshape(-1, image.channels)
    return [
        ClusterStats(1, tuple(int(v) for v in p), sum(int(v) * int(v) for v in p))
        for p in px
    ]


class _RegionMerger:
    """Shared greedy selection: yields adjacent region pairs in merge order.

    Regions are numbered by creation (pixels first); statistics are exact
    integers so both segmentation variants see identical costs and identical
    tie-breaks.
    """

    def __init__(self, leaf_stats: list[ClusterStats], width: int, height: int):
        self.n = [s.n for s in leaf_stats]
        self.sums = [s.sums for s in leaf_stats]
        self.rag = _grid_rag(width, height)
        self.alive = [True] * len(leaf_stats)
        self.heap = [(self._cost(u, v), u, v) for u, v in self.rag.edges()]
        heapq.heapify(self.heap)

    def _cost(self, u: int, v: int) -> float:
        nu, nv = self.n[u], self.n[v]
        acc = 0.0
        for a, b in zip(self.sums[u], self.sums[v]):
            d = a / nu - b / nv
            acc += d * d
        return nu * nv / (nu + nv) * acc

    def merges(self):
        """Yield (u, v) region pairs; region N+k is the k-th merge result."""
        remaining = len(self.n)
        while remaining > 1:
            while True:
                _, u, v = heapq.heappop(self.heap)
                if self.alive[u] and self.alive[v]:
                    break
            w = len(self.n)
            self.n.append(self.n[u] + self.n[v])
            self.sums.append(tuple(a + b for a, b in zip(self.sums[u], self.sums[v])))
            self.alive[u] = self.alive[v] = False
            self.alive.append(True)
            for x in self.rag.merge(u, v, w):
                heapq.heappush(self.heap, (self._cost(w, x), min(w, x), max(w, x)))
            remaining -= 1
            yield u, v


def greedy_segment(image) -> Hierarchy:
    """Conventional adjacent-region merging; ranks follow merge order.

    Every cluster of every cut is a 4-connected pixel set, and inversions in
    the cost sequence are preserved (the output is generally not convex).
    """
    leaf_stats = _pixel_leaf_stats(image)
    if len(leaf_stats) == 1:
        return build_from_merges(leaf_stats, [])
    merger = _RegionMerger(leaf_stats, image.width, image.height)
    merges = list(merger.merges())
    return build_from_merges(leaf_stats, merges)


def segment_restructured(image, epsilon: float | None = None) -> Hierarchy:
    """Adjacent-region merging with immediate restructuring after every merge.

    The merge pair selection is identical to greedy_segment (restructuring
    never changes a region's total statistics, hence never its edge costs);
    each union is repaired into a convex sub-hierarchy, so the final result is
    convex and its clusters may be spatially disconnected.
    """
    leaf_stats = _pixel_leaf_stats(image)
    pool = Pool(image.channels)
    for s in leaf_stats:
        pool.add_leaf(s)
    if len(leaf_stats) == 1:
        return compact(pool, 0)
    if epsilon is None:
        whole = leaf_stats[0]
        for s in leaf_stats[1:]:
            whole = merge_stats(whole, s)
        eps = REL_EPSILON * cluster_error(whole)
    else:
        eps = float(epsilon)
    merger = _RegionMerger(leaf_stats, image.width, image.height)
    region_root = list(range(len(leaf_stats)))
    for u, v in merger.merges():
        root = join_convex(pool, region_root[u], region_root[v], eps)
        region_root.append(root)
    return compact(pool, region_root[-1], eps=eps)
