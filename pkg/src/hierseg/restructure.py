"""Combined merge/restructure: unite hierarchies and repair convexity.

Joining two structured hierarchies can embed an expensive merge below a cheap
one (the joint cost is smaller than a child's formation cost).  The repair
loop detects such embeddings, crushes the offending sub-hierarchies at the
violation points, re-merges the kept subtree roots with Ward's method, and
repeats until the joint hierarchy is convex.  Convex inputs pass through
untouched, and the loop refines the kept partition every iteration, so it
ends within N-1 rounds.

The engine works on a mutable node pool; public entry points copy hierarchies
in, run the loop, and compact the surviving nodes back out in canonical
(ascending-cost) rank order.  Root statistics are exact integers throughout,
so restructuring never changes the error of the whole cluster.
"""

from __future__ import annotations

import heapq

import numpy as np

from .hierarchy import REL_EPSILON, Hierarchy, build_from_merges, _rerank_by_cost
from .stats import ClusterStats, cluster_error, merge_stats
from .ward import ward_merge_order

__all__ = ["combined_merge", "restructure"]


class Pool:
    """Append-only forest workspace: parallel per-node field lists.

    Statistics are exact Python integers; costs are floats used only to steer
    restructuring (the final Hierarchy recomputes costs from the integers).
    Superseded nodes are simply abandoned and skipped at compaction.
    """

    def __init__(self, channels: int):
        self.channels = channels
        self.n: list[int] = []
        self.sums: list[tuple[int, ...]] = []
        self.sumsq: list[int] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.cost: list[float] = []
        self.nleaf: list[int] = []

    def __len__(self) -> int:
        return len(self.n)

    def add_leaf(self, s: ClusterStats) -> int:
        if s.n < 1:
            raise ValueError("pool leaves must be non-empty clusters")
        self.n.append(s.n)
        self.sums.append(s.sums)
        self.sumsq.append(s.sumsq)
        self.left.append(-1)
        self.right.append(-1)
        self.cost.append(0.0)
        self.nleaf.append(1)
        return len(self.n) - 1

    def join(self, u: int, v: int) -> int:
        nu, nv = self.n[u], self.n[v]
        su, sv = self.sums[u], self.sums[v]
        num = 0.0
        for a, b in zip(su, sv):
            d = a / nu - b / nv
            num += d * d
        self.cost.append(nu * nv / (nu + nv) * num)
        self.n.append(nu + nv)
        self.sums.append(tuple(a + b for a, b in zip(su, sv)))
        self.sumsq.append(self.sumsq[u] + self.sumsq[v])
        self.left.append(u)
        self.right.append(v)
        self.nleaf.append(self.nleaf[u] + self.nleaf[v])
        return len(self.n) - 1

    def is_leaf(self, v: int) -> bool:
        return self.left[v] < 0

    def error(self, v: int) -> float:
        if self.n[v] <= 1:
            return 0.0
        num = self.n[v] * self.sumsq[v] - sum(s * s for s in self.sums[v])
        return num / self.n[v]

    def copy_hierarchy(self, h: Hierarchy) -> tuple[int, dict[int, int]]:
        """Append all of h's nodes (leaves first, then merges in rank order).

        Returns the pool root and the hierarchy-id to pool-id map.
        """
        base = len(self.n)
        for leaf in range(h.n_leaves):
            self.add_leaf(h.stats(leaf))
        order = np.argsort(h.merge_ranks[h.n_leaves:]) + h.n_leaves
        remap = {v: base + v for v in range(h.n_leaves)}
        root = base
        for v in order:
            l, r = h.children(int(v))
            root = self.join(remap[l], remap[r])
            remap[int(v)] = root
        return root, remap

    def subtree_internal(self, root: int) -> list[int]:
        out = []
        stack = [root]
        while stack:
            v = stack.pop()
            if self.left[v] >= 0:
                out.append(v)
                stack.append(self.right[v])
                stack.append(self.left[v])
        return out

    def subtree_leaves(self, root: int) -> list[int]:
        out = []
        stack = [root]
        while stack:
            v = stack.pop()
            if self.left[v] < 0:
                out.append(v)
            else:
                stack.append(self.right[v])
                stack.append(self.left[v])
        return out


def ward_over(pool: Pool, items: list[int]) -> int:
    """Build a Ward tree over pool subtree roots; returns the new root id."""
    if len(items) == 1:
        return items[0]
    n = np.array([pool.n[v] for v in items], dtype=np.float64)
    sums = np.array([pool.sums[v] for v in items], dtype=np.float64)
    merges = ward_merge_order(n, sums)
    ids = list(items)
    for u, v in merges:
        ids.append(pool.join(ids[u], ids[v]))
    return ids[-1]


def join_convex(pool: Pool, a: int, b: int, eps: float) -> int:
    """Merge two internally convex subtrees and repair convexity violations.

    Implements the iterative detect / crush / Ward re-merge loop.  Assumes
    both inputs are convex, so violations start at the join and migrate to
    kept-root boundaries only.
    """
    joint = pool.join(a, b)
    crushed = [v for v in (a, b)
               if not pool.is_leaf(v) and pool.cost[v] > pool.cost[joint] + eps]
    if not crushed:
        return joint
    frontier = []
    for v in (a, b):
        if v in crushed:
            frontier.extend((pool.left[v], pool.right[v]))
        else:
            frontier.append(v)
    return _rebuild_loop(pool, frontier, eps, pool.nleaf[joint] - 1, rounds_used=1)


def _rebuild_loop(pool: Pool, frontier: list[int], eps: float,
                  max_rounds: int, rounds_used: int) -> int:
    """Ward over the frontier, crush boundary violators, repeat to fixpoint."""
    while True:
        if rounds_used > max_rounds:
            raise RuntimeError("restructuring did not terminate within N-1 rounds")
        root = ward_over(pool, frontier)
        parent_cost = _frontier_parent_costs(pool, root, set(frontier))
        crushed = [v for v in frontier
                   if not pool.is_leaf(v) and pool.cost[v] > parent_cost[v] + eps]
        if not crushed:
            return root
        rounds_used += 1
        crushed_set = set(crushed)
        nxt = []
        for v in frontier:
            if v in crushed_set:
                nxt.extend((pool.left[v], pool.right[v]))
            else:
                nxt.append(v)
        frontier = nxt


def _frontier_parent_costs(pool: Pool, root: int, frontier: set[int]) -> dict[int, float]:
    out: dict[int, float] = {}
    if root in frontier:
        out[root] = np.inf
        return out
    stack = [root]
    while stack:
        v = stack.pop()
        for ch in (pool.left[v], pool.right[v]):
            if ch in frontier:
                out[ch] = pool.cost[v]
            elif pool.left[ch] >= 0:
                stack.append(ch)
    return out


def convexify(pool: Pool, root: int, eps: float) -> int:
    """Bottom-up convexification of an arbitrary subtree.

    Children are repaired before their parent, so every parent-level repair
    runs with convex inputs; already-convex regions come through unchanged.
    """
    result: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        v, ready = stack.pop()
        if pool.is_leaf(v):
            result[v] = v
            continue
        if not ready:
            stack.append((v, True))
            stack.append((pool.left[v], False))
            stack.append((pool.right[v], False))
            continue
        l = result[pool.left[v]]
        r = result[pool.right[v]]
        if l == pool.left[v] and r == pool.right[v]:
            node = v
            crushed = [c for c in (l, r)
                       if not pool.is_leaf(c) and pool.cost[c] > pool.cost[node] + eps]
            if not crushed:
                result[v] = node
                continue
            frontier = []
            for c in (l, r):
                if c in crushed:
                    frontier.extend((pool.left[c], pool.right[c]))
                else:
                    frontier.append(c)
            result[v] = _rebuild_loop(pool, frontier, eps,
                                      pool.nleaf[node] - 1, rounds_used=1)
        else:
            result[v] = join_convex(pool, l, r, eps)
    return result[root]


def compact(pool: Pool, root: int, pixel_ids=None, eps: float | None = None,
            want_map: bool = False, strict: bool = True):
    """Extract the subtree at root into a canonical immutable Hierarchy.

    Pool leaves must be exactly ids 0..N-1 (the copy/extend helpers keep this
    true); internal nodes are renumbered in ascending-cost rank order.  With
    want_map, also returns the pool-id to final-id map.  strict=False skips
    the convexity precondition of the re-ranking (still a valid merge order).
    """
    n_leaves = pool.nleaf[root]
    leaves = sorted(pool.subtree_leaves(root))
    if leaves != list(range(n_leaves)):
        raise ValueError("pool leaves must stay contiguous from id 0")
    internal = pool.subtree_internal(root)
    order = _cost_topo_order(pool, internal)
    leaf_stats = [
        ClusterStats(pool.n[v], pool.sums[v], pool.sumsq[v]) for v in leaves
    ]
    final = {v: v for v in leaves}
    merges = []
    for v in order:
        merges.append((final[pool.left[v]], final[pool.right[v]]))
        final[v] = n_leaves + len(merges) - 1
    h = build_from_merges(leaf_stats, merges, pixel_ids)
    h = h.canonicalize(eps) if strict else _rerank_by_cost(h)
    return (h, final) if want_map else h


def _cost_topo_order(pool: Pool, internal: list[int]) -> list[int]:
    members = set(internal)
    pending = {}
    dependents: dict[int, list[int]] = {}
    for v in internal:
        cnt = 0
        for ch in (pool.left[v], pool.right[v]):
            if ch in members:
                cnt += 1
                dependents.setdefault(ch, []).append(v)
        pending[v] = cnt
    heap = [(pool.cost[v], v) for v in internal if pending[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, v = heapq.heappop(heap)
        order.append(v)
        for p in dependents.get(v, ()):
            pending[p] -= 1
            if pending[p] == 0:
                heapq.heappush(heap, (pool.cost[p], p))
    assert len(order) == len(internal)
    return order


# -- public operations ---------------------------------------------------------


def restructure(h: Hierarchy, epsilon: float | None = None) -> Hierarchy:
    """Convert any hierarchy into a convex (quasioptimal) one.

    The leaf set is preserved, root statistics are unchanged exactly, and an
    already-convex hierarchy comes back with identical topology (ranks in
    canonical order).
    """
    eps = h.absolute_epsilon() if epsilon is None else float(epsilon)
    pool = Pool(h.channels)
    root, _ = pool.copy_hierarchy(h)
    root = convexify(pool, root, eps)
    return compact(pool, root, h.leaf_pixel_map, eps)


def combined_merge(a: Hierarchy, b: Hierarchy,
                   epsilon: float | None = None) -> Hierarchy:
    """Unite two hierarchies over disjoint pixel sets into a convex one.

    Convex inputs whose root costs sit below the joining cost are joined
    as-is; otherwise the crush/re-merge loop runs.  Leaves keep their pixel
    ids: the union maps leaf i < a.n_leaves to a's pixel i, the rest to b's.
    """
    if a.channels != b.channels:
        raise ValueError("hierarchies must share one channel count")
    pix_a = set(int(p) for p in a.leaf_pixel_map)
    pix_b = set(int(p) for p in b.leaf_pixel_map)
    if pix_a & pix_b:
        raise ValueError("hierarchies must cover disjoint pixel sets")
    pool = Pool(a.channels)
    for leaf in range(a.n_leaves):
        pool.add_leaf(a.stats(leaf))
    for leaf in range(b.n_leaves):
        pool.add_leaf(b.stats(leaf))
    root_a = _copy_internal(pool, a, offset=0)
    root_b = _copy_internal(pool, b, offset=a.n_leaves)
    if epsilon is None:
        joint = merge_stats(a.stats(a.root), b.stats(b.root))
        eps = REL_EPSILON * cluster_error(joint)
    else:
        eps = float(epsilon)
    root_a = convexify(pool, root_a, eps)
    root_b = convexify(pool, root_b, eps)
    root = join_convex(pool, root_a, root_b, eps)
    pixel_ids = np.concatenate([a.leaf_pixel_map, b.leaf_pixel_map])
    return compact(pool, root, pixel_ids, eps)


def _copy_internal(pool: Pool, h: Hierarchy, offset: int) -> int:
    """Copy h's internal structure onto pool leaves [offset, offset+N)."""
    if h.n_leaves == 1:
        return offset
    order = np.argsort(h.merge_ranks[h.n_leaves:]) + h.n_leaves
    remap = {v: offset + v for v in range(h.n_leaves)}
    root = offset
    for v in order:
        l, r = h.children(int(v))
        root = pool.join(remap[l], remap[r])
        remap[int(v)] = root
    return root
