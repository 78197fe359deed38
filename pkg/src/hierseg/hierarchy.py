"""Dendrogram storage for the full family of nested approximations.

A hierarchy over N leaves is a full binary merge tree of 2N-1 nodes held in
flat parallel arrays, so all N nested partitions are available from O(N)
memory with no per-level copies.  Leaves occupy ids 0..N-1 and map onto pixel
(or item) indices through ``leaf_pixel_map``; internal nodes follow in
construction order, each storing the exact statistics of its cluster, the
error increment paid when its children merged, and its position in the merge
sequence.  Dividing a node is free and exactly reversible: the node record is
never destroyed, so re-merging restores bit-identical statistics.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .stats import (
    ClusterStats,
    cluster_error,
    merge_increment,
    sigma_from_error,
)

__all__ = [
    "REL_EPSILON",
    "HierarchyNode",
    "Partition",
    "ErrorCurve",
    "Hierarchy",
    "build_from_merges",
    "DumpedHierarchy",
    "parse_dump_text",
]

#: Default convexity tolerance, relative to the root error E_1.
REL_EPSILON = 1e-9


@dataclass(frozen=True)
class HierarchyNode:
    """Read-only view of one dendrogram node."""

    id: int
    parent: int | None
    children: tuple[int, int] | None
    stats: ClusterStats
    merge_cost: float
    merge_rank: int


@dataclass
class Partition:
    """Labeling of the leaves into g clusters at some level of the hierarchy.

    ``labels[k]`` is the NodeId owning leaf k; the pixel index of leaf k is
    ``hierarchy.leaf_pixel_map[k]`` (the identity for whole-image and plain
    item hierarchies).
    """

    labels: np.ndarray
    g: int
    total_error: float

    def cluster_ids(self) -> np.ndarray:
        return np.unique(self.labels)


@dataclass
class ErrorCurve:
    """Rows (g, E_g, sigma_g) for g = 1..len(rows)."""

    g: np.ndarray
    error: np.ndarray
    sigma: np.ndarray

    def __len__(self) -> int:
        return len(self.g)

    def rows(self):
        for i in range(len(self.g)):
            yield int(self.g[i]), float(self.error[i]), float(self.sigma[i])


class Hierarchy:
    """Immutable dendrogram of 2N-1 nodes over N leaves."""

    def __init__(self, n, sums, sumsq, parent, left, right, cost, rank,
                 channels: int, leaf_pixel_map):
        self._n = _frozen(np.asarray(n, dtype=np.int64))
        self._sums = _frozen(np.asarray(sums, dtype=np.int64))
        self._sumsq = _frozen(np.asarray(sumsq, dtype=np.int64))
        self._parent = _frozen(np.asarray(parent, dtype=np.int64))
        self._left = _frozen(np.asarray(left, dtype=np.int64))
        self._right = _frozen(np.asarray(right, dtype=np.int64))
        self._cost = _frozen(np.asarray(cost, dtype=np.float64))
        self._rank = _frozen(np.asarray(rank, dtype=np.int64))
        self._channels = int(channels)
        self._map = _frozen(np.asarray(leaf_pixel_map, dtype=np.int64))
        self._n_leaves = len(self._map)
        if len(self._n) != 2 * self._n_leaves - 1:
            raise ValueError("a hierarchy over N leaves needs exactly 2N-1 nodes")

    # -- basic shape ---------------------------------------------------------

    @property
    def n_leaves(self) -> int:
        return self._n_leaves

    @property
    def n_nodes(self) -> int:
        return 2 * self._n_leaves - 1

    @property
    def n_pixels(self) -> int:
        """Total pixel weight at the root (equals n_leaves for pixel leaves)."""
        return int(self._n[self.root])

    @property
    def channels(self) -> int:
        return self._channels

    @property
    def root(self) -> int:
        return self.n_nodes - 1

    @property
    def leaf_pixel_map(self) -> np.ndarray:
        return self._map

    @property
    def merge_costs(self) -> np.ndarray:
        """Per-node merge cost (0.0 for leaves)."""
        return self._cost

    @property
    def merge_ranks(self) -> np.ndarray:
        """Per-node merge rank (0 for leaves, 1..N-1 for internal nodes)."""
        return self._rank

    @property
    def parents(self) -> np.ndarray:
        return self._parent

    def is_leaf(self, node: int) -> bool:
        return node < self._n_leaves

    def children(self, node: int) -> tuple[int, int] | None:
        if node < self._n_leaves:
            return None
        return int(self._left[node]), int(self._right[node])

    def parent(self, node: int) -> int | None:
        p = int(self._parent[node])
        return None if p < 0 else p

    def stats(self, node: int) -> ClusterStats:
        return ClusterStats(
            int(self._n[node]),
            tuple(int(v) for v in self._sums[node]),
            int(self._sumsq[node]),
        )

    def merge_cost(self, node: int) -> float:
        return float(self._cost[node])

    def merge_rank(self, node: int) -> int:
        return int(self._rank[node])

    def node(self, node: int) -> HierarchyNode:
        return HierarchyNode(
            id=node,
            parent=self.parent(node),
            children=self.children(node),
            stats=self.stats(node),
            merge_cost=self.merge_cost(node),
            merge_rank=self.merge_rank(node),
        )

    def root_error(self) -> float:
        return cluster_error(self.stats(self.root))

    def absolute_epsilon(self, rel: float = REL_EPSILON) -> float:
        return rel * self.root_error()

    def subtree_leaves(self, node: int) -> list[int]:
        """Leaf ids under a node, in depth-first order."""
        out: list[int] = []
        stack = [node]
        while stack:
            v = stack.pop()
            if v < self._n_leaves:
                out.append(v)
            else:
                stack.append(int(self._right[v]))
                stack.append(int(self._left[v]))
        return out

    # -- level operations ----------------------------------------------------

    def divide(self, node: int) -> tuple[int, int, float]:
        """Reverse the merge stored at an internal node.

        Returns the two children and the (non-positive) error drop, equal to
        the negated merge cost.  Nothing is mutated: the node record stays in
        place, so a re-merge restores identical statistics.
        """
        if node < self._n_leaves:
            raise ValueError(f"node {node} is a leaf and cannot be divided")
        return int(self._left[node]), int(self._right[node]), -float(self._cost[node])

    def cut_at(self, g: int) -> Partition:
        """Partition into exactly g clusters after the first N-g ranked merges."""
        n = self._n_leaves
        if not 1 <= g <= n:
            raise ValueError(f"cluster count {g} outside 1..{n}")
        limit = n - g
        rank = self._rank
        labels = np.empty(n, dtype=np.int64)
        total = 0.0
        count = 0
        for v in range(self.n_nodes):
            if rank[v] > limit:
                continue
            p = int(self._parent[v])
            if p >= 0 and rank[p] <= limit:
                continue
            count += 1
            total += cluster_error(self.stats(v))
            for leaf in self.subtree_leaves(v):
                labels[leaf] = v
        assert count == g
        return Partition(labels=labels, g=g, total_error=total)

    def error_curve(self, g_max: int) -> ErrorCurve:
        """Rows (g, E_g, sigma_g) for g = 1..g_max under the stored ranks."""
        n = self._n_leaves
        if not 1 <= g_max <= n:
            raise ValueError(f"g_max {g_max} outside 1..{n}")
        leaf_err = sum(cluster_error(self.stats(v)) for v in range(n)
                       if int(self._n[v]) > 1)
        cost_by_rank = np.zeros(n, dtype=np.float64)
        internal = np.arange(n, self.n_nodes)
        cost_by_rank[self._rank[internal] - 1] = self._cost[internal]
        cum = np.concatenate(([0.0], np.cumsum(cost_by_rank[: n - 1])))
        gs = np.arange(1, g_max + 1, dtype=np.int64)
        errors = leaf_err + cum[n - gs]
        npx = self.n_pixels
        sigmas = np.array(
            [sigma_from_error(max(e, 0.0), npx, self._channels) for e in errors]
        )
        return ErrorCurve(g=gs, error=errors, sigma=sigmas)

    # -- convexity -----------------------------------------------------------

    def is_convex(self, epsilon: float | None = None) -> tuple[bool, list[int]]:
        """Check per-node merge-cost monotonicity up the tree.

        Every internal node must cost at least as much as each of its internal
        children, minus epsilon.  Returns (ok, violating child ids).
        """
        eps = self.absolute_epsilon() if epsilon is None else float(epsilon)
        if eps < 0:
            raise ValueError("epsilon must be non-negative")
        n = self._n_leaves
        internal = np.arange(n, self.n_nodes - 1)  # internal non-root nodes
        if len(internal) == 0:
            return True, []
        bad = self._cost[self._parent[internal]] < self._cost[internal] - eps
        violators = [int(v) for v in internal[bad]]
        return not violators, violators

    def canonicalize(self, epsilon: float | None = None) -> "Hierarchy":
        """Re-rank merges by ascending cost (convex hierarchies only).

        Ties break toward the smaller NodeId.  A cost-ordered topological heap
        is used so that tolerance-level inversions still produce a valid merge
        order.  Topology and statistics are unchanged.
        """
        ok, _ = self.is_convex(epsilon)
        if not ok:
            raise ValueError("cannot canonicalize a non-convex hierarchy")
        return _rerank_by_cost(self)

    def _cost_topological_order(self) -> list[int]:
        n = self._n_leaves
        pending = np.zeros(self.n_nodes, dtype=np.int64)
        for v in range(n, self.n_nodes):
            for ch in (int(self._left[v]), int(self._right[v])):
                if ch >= n:
                    pending[v] += 1
        heap = [(float(self._cost[v]), v) for v in range(n, self.n_nodes)
                if pending[v] == 0]
        heapq.heapify(heap)
        order: list[int] = []
        while heap:
            _, v = heapq.heappop(heap)
            order.append(v)
            p = int(self._parent[v])
            if p >= 0:
                pending[p] -= 1
                if pending[p] == 0:
                    heapq.heappush(heap, (float(self._cost[p]), p))
        return order

    # -- serialization -------------------------------------------------------

    def dump_text(self) -> str:
        """Line-delimited dump, one record per node.

        Field order: id, parent, child1, child2, n, per-channel mean (6
        decimal places), merge_cost (full-precision decimal), merge_rank.
        Missing parent/children are -1.  Leaf id k denotes pixel k.
        """
        lines = []
        for v in range(self.n_nodes):
            mean = [s / self._n[v] for s in self._sums[v]]
            fields = [
                str(v),
                str(int(self._parent[v])),
                str(int(self._left[v])),
                str(int(self._right[v])),
                str(int(self._n[v])),
                *(f"{m:.6f}" for m in mean),
                repr(float(self._cost[v])),
                str(int(self._rank[v])),
            ]
            lines.append(" ".join(fields))
        return "\n".join(lines) + "\n"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.setflags(write=False)
    return a


def _rerank_by_cost(h: Hierarchy) -> Hierarchy:
    """Rank assignment from the cost-ordered topological heap, no precondition."""
    order = h._cost_topological_order()
    rank = np.zeros(h.n_nodes, dtype=np.int64)
    for pos, v in enumerate(order):
        rank[v] = pos + 1
    return Hierarchy(h._n, h._sums, h._sumsq, h._parent, h._left, h._right,
                     h._cost, rank, h._channels, h._map)


def build_from_merges(
    leaf_stats: list[ClusterStats],
    merges: list[tuple[int, int]],
    pixel_ids=None,
) -> Hierarchy:
    """Construct a hierarchy from leaf statistics and an ordered merge list.

    Leaves get ids 0..N-1; the k-th merge pair must reference two live node
    ids and creates node N+k with merge rank k+1.  Costs are recomputed from
    exact integer statistics.
    """
    n_leaves = len(leaf_stats)
    if n_leaves == 0:
        raise ValueError("a hierarchy needs at least one leaf")
    channels = leaf_stats[0].channels
    for s in leaf_stats:
        if s.n < 1:
            raise ValueError("leaf clusters must be non-empty")
        if s.channels != channels:
            raise ValueError("leaf clusters must share one channel count")
    if len(merges) != n_leaves - 1:
        raise ValueError(f"expected {n_leaves - 1} merges, got {len(merges)}")
    if pixel_ids is None:
        pixel_ids = np.arange(n_leaves, dtype=np.int64)
    else:
        pixel_ids = np.asarray(pixel_ids, dtype=np.int64)
        if len(pixel_ids) != n_leaves or len(np.unique(pixel_ids)) != n_leaves:
            raise ValueError("pixel_ids must be a bijection over the leaves")

    m = 2 * n_leaves - 1
    n = np.zeros(m, dtype=np.int64)
    sums = np.zeros((m, channels), dtype=np.int64)
    sumsq = np.zeros(m, dtype=np.int64)
    parent = np.full(m, -1, dtype=np.int64)
    left = np.full(m, -1, dtype=np.int64)
    right = np.full(m, -1, dtype=np.int64)
    cost = np.zeros(m, dtype=np.float64)
    rank = np.zeros(m, dtype=np.int64)

    stats: list[ClusterStats] = list(leaf_stats)
    for v, s in enumerate(leaf_stats):
        n[v] = s.n
        sums[v] = s.sums
        sumsq[v] = s.sumsq

    live = [True] * m
    for k, (u, v) in enumerate(merges):
        w = n_leaves + k
        for x in (u, v):
            if not 0 <= x < w:
                raise ValueError(f"merge {k} references unknown node {x}")
            if not live[x]:
                raise ValueError(f"merge {k} references already-merged node {x}")
        if u == v:
            raise ValueError(f"merge {k} pairs node {u} with itself")
        su, sv = stats[u], stats[v]
        cost[w] = merge_increment(su, sv)
        sw = ClusterStats(su.n + sv.n,
                          tuple(a + b for a, b in zip(su.sums, sv.sums)),
                          su.sumsq + sv.sumsq)
        stats.append(sw)
        n[w] = sw.n
        sums[w] = sw.sums
        sumsq[w] = sw.sumsq
        left[w], right[w] = u, v
        parent[u] = parent[v] = w
        rank[w] = k + 1
        live[u] = live[v] = False

    return Hierarchy(n, sums, sumsq, parent, left, right, cost, rank,
                     channels, pixel_ids)


# -- parsed dumps -------------------------------------------------------------


class DumpedHierarchy:
    """Structure parsed back from a hierarchy dump.

    Means carry 6 decimal places and exact statistics are absent, so a dump
    alone supports rank cuts and telescoped error curves; pair it with the
    original image (``rebuild``) to recover a full exact Hierarchy.
    """

    def __init__(self, parent, left, right, n, means, cost, rank):
        self.parent = np.asarray(parent, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.n = np.asarray(n, dtype=np.int64)
        self.means = np.asarray(means, dtype=np.float64)
        self.cost = np.asarray(cost, dtype=np.float64)
        self.rank = np.asarray(rank, dtype=np.int64)
        self.n_nodes = len(self.n)
        self.n_leaves = (self.n_nodes + 1) // 2
        self.channels = self.means.shape[1]
        self.root = self.n_nodes - 1

    def error_curve(self, g_max: int) -> ErrorCurve:
        n = self.n_leaves
        if not 1 <= g_max <= n:
            raise ValueError(f"g_max {g_max} outside 1..{n}")
        cost_by_rank = np.zeros(n, dtype=np.float64)
        internal = np.arange(n, self.n_nodes)
        cost_by_rank[self.rank[internal] - 1] = self.cost[internal]
        cum = np.concatenate(([0.0], np.cumsum(cost_by_rank[: n - 1])))
        gs = np.arange(1, g_max + 1, dtype=np.int64)
        errors = cum[n - gs]
        npx = int(self.n[self.root])
        sigmas = np.array(
            [sigma_from_error(max(e, 0.0), npx, self.channels) for e in errors]
        )
        return ErrorCurve(g=gs, error=errors, sigma=sigmas)

    def cut_labels(self, g: int) -> np.ndarray:
        """Leaf id -> owning node id after the first N-g ranked merges."""
        n = self.n_leaves
        if not 1 <= g <= n:
            raise ValueError(f"cluster count {g} outside 1..{n}")
        limit = n - g
        labels = np.empty(n, dtype=np.int64)
        for v in range(self.n_nodes):
            if self.rank[v] > limit:
                continue
            p = int(self.parent[v])
            if p >= 0 and self.rank[p] <= limit:
                continue
            stack = [v]
            while stack:
                x = stack.pop()
                if x < n:
                    labels[x] = v
                else:
                    stack.append(int(self.right[x]))
                    stack.append(int(self.left[x]))
        return labels

    def merge_list(self) -> list[tuple[int, int]]:
        """Merges in rank order, expressed over this dump's node ids."""
        order = np.argsort(self.rank[self.n_leaves:]) + self.n_leaves
        return [(int(self.left[v]), int(self.right[v])) for v in order]

    def rebuild(self, leaf_stats: list[ClusterStats]) -> Hierarchy:
        """Reattach exact leaf statistics (pixel k = leaf k) to this topology."""
        if len(leaf_stats) != self.n_leaves:
            raise ValueError(
                f"dump has {self.n_leaves} leaves, got {len(leaf_stats)} stats"
            )
        merges = self.merge_list()
        remap = np.empty(self.n_nodes, dtype=np.int64)
        remap[: self.n_leaves] = np.arange(self.n_leaves)
        order = np.argsort(self.rank[self.n_leaves:]) + self.n_leaves
        for k, v in enumerate(order):
            remap[v] = self.n_leaves + k
        remapped = [(int(remap[u]), int(remap[v])) for u, v in merges]
        h = build_from_merges(leaf_stats, remapped)
        if not np.array_equal(h._n, self.n[np.argsort(remap)]):
            raise ValueError("dump pixel counts do not match the supplied image")
        return h

    def dump_text(self) -> str:
        lines = []
        for v in range(self.n_nodes):
            fields = [
                str(v),
                str(int(self.parent[v])),
                str(int(self.left[v])),
                str(int(self.right[v])),
                str(int(self.n[v])),
                *(f"{m:.6f}" for m in self.means[v]),
                repr(float(self.cost[v])),
                str(int(self.rank[v])),
            ]
            lines.append(" ".join(fields))
        return "\n".join(lines) + "\n"


def parse_dump_text(text: str) -> DumpedHierarchy:
    """Parse a hierarchy dump produced by ``Hierarchy.dump_text``."""
    rows = []
    channels = None
    for lineno, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) < 8:
            raise ValueError(f"dump line {lineno + 1}: too few fields")
        c = len(fields) - 7
        if c not in (1, 3):
            raise ValueError(f"dump line {lineno + 1}: bad field count {len(fields)}")
        if channels is None:
            channels = c
        elif c != channels:
            raise ValueError(f"dump line {lineno + 1}: inconsistent channel count")
        try:
            rec = (
                int(fields[0]), int(fields[1]), int(fields[2]), int(fields[3]),
                int(fields[4]),
                tuple(float(x) for x in fields[5:5 + c]),
                float(fields[5 + c]), int(fields[6 + c]),
            )
        except ValueError as exc:
            raise ValueError(f"dump line {lineno + 1}: {exc}") from None
        rows.append(rec)
    if not rows:
        raise ValueError("empty hierarchy dump")
    if len(rows) % 2 == 0:
        raise ValueError("a dichotomous hierarchy has an odd node count")
    ids = [r[0] for r in rows]
    if ids != list(range(len(rows))):
        raise ValueError("dump records must be numbered 0..2N-2 in order")
    parent = [r[1] for r in rows]
    left = [r[2] for r in rows]
    right = [r[3] for r in rows]
    n = [r[4] for r in rows]
    means = [r[5] for r in rows]
    cost = [r[6] for r in rows]
    rank = [r[7] for r in rows]
    d = DumpedHierarchy(parent, left, right, n, means, cost, rank)
    _validate_dump(d)
    return d


def _validate_dump(d: DumpedHierarchy) -> None:
    n = d.n_leaves
    if int(d.parent[d.root]) != -1:
        raise ValueError("last dump record must be the root (parent -1)")
    for v in range(d.n_nodes):
        l, r = int(d.left[v]), int(d.right[v])
        if v < n:
            if l != -1 or r != -1:
                raise ValueError(f"leaf {v} must have children -1 -1")
            if d.rank[v] != 0:
                raise ValueError(f"leaf {v} must have rank 0")
        else:
            if not (0 <= l < v and 0 <= r < v):
                raise ValueError(f"node {v} has invalid children")
            if int(d.parent[l]) != v or int(d.parent[r]) != v:
                raise ValueError(f"child links of node {v} are inconsistent")
            if d.n[v] != d.n[l] + d.n[r]:
                raise ValueError(f"node {v} pixel count is not the sum of children")
    ranks = sorted(int(d.rank[v]) for v in range(n, d.n_nodes))
    if ranks != list(range(1, n)):
        raise ValueError("internal ranks must be a permutation of 1..N-1")
    for v in range(n, d.n_nodes):
        for ch in (int(d.left[v]), int(d.right[v])):
            if ch >= n and d.rank[ch] >= d.rank[v]:
                raise ValueError("merge ranks must increase toward the root")
