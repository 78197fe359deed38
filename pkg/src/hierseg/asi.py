"""Fixed-size partition improvement by alternating splits and merges.

A partition of g clusters is improvable while some cluster's stored dichotomy
would release more error than the cheapest cluster pair costs to unite.  Each
round divides the cluster with the maximal drop, then merges the pair of the
g+1 resulting clusters with the minimal increment; because every union runs
through the combined merge/restructure operation, the merged cluster's
dichotomy is rebuilt convex and the released error keeps compounding (this is
what separates ASI from plain split-and-merge improvement).  The loop halts
when the minimal merge increment is at least the maximal drop, or when no
remaining split leads to a strictly improving merge.

Clustering mode considers all cluster pairs; segmentation mode only pairs
whose pixel sets touch under 4-connectivity, with adjacency recomputed from
the evolving labels.
"""

from __future__ import annotations

import numpy as np

from .hierarchy import Hierarchy, Partition
from .restructure import Pool, compact, convexify, join_convex, ward_over

__all__ = ["best_split", "best_merge", "asi_improve"]

MODES = ("clustering", "segmentation")


def best_split(partition: Partition, h: Hierarchy) -> tuple[int, float]:
    """Cluster whose stored dichotomy yields the maximal error drop.

    Leaves drop 0; ties break toward the smaller NodeId.  The drop is the
    absolute released error (the divide operation itself reports it negated).
    """
    best_node = -1
    best_drop = -1.0
    for v in sorted(int(x) for x in np.unique(partition.labels)):
        drop = 0.0 if h.is_leaf(v) else h.merge_cost(v)
        if drop > best_drop:
            best_node, best_drop = v, drop
    return best_node, best_drop


def best_merge(partition: Partition, h: Hierarchy, mode: str = "clustering",
               shape: tuple[int, int] | None = None) -> tuple[tuple[int, int], float]:
    """Cluster pair with the minimal merge increment.

    Segmentation mode restricts candidates to pairs adjacent on the pixel
    grid, whose (width, height) must be supplied.  Ties break toward the
    lexicographically smallest (min NodeId, max NodeId).
    """
    clusters = [int(x) for x in np.unique(partition.labels)]
    if len(clusters) < 2:
        raise ValueError("merging needs at least two clusters")
    n = np.array([h.stats(v).n for v in clusters], dtype=np.float64)
    sums = np.array([h.stats(v).sums for v in clusters], dtype=np.float64)
    mu = sums / n[:, None]
    if mode == "clustering":
        pairs = [(i, j) for i in range(len(clusters)) for j in range(i + 1, len(clusters))]
    elif mode == "segmentation":
        if shape is None:
            raise ValueError("segmentation mode needs the raster (width, height)")
        index = {v: i for i, v in enumerate(clusters)}
        pairs = sorted(
            (index[u], index[v])
            for u, v in _adjacent_label_pairs(partition.labels, h.leaf_pixel_map, shape)
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    best = None
    best_cost = np.inf
    for i, j in pairs:
        cost = n[i] * n[j] / (n[i] + n[j]) * float(((mu[i] - mu[j]) ** 2).sum())
        key = (min(clusters[i], clusters[j]), max(clusters[i], clusters[j]))
        if cost < best_cost or (cost == best_cost and key < best):
            best_cost = cost
            best = key
    return best, float(best_cost)


def _adjacent_label_pairs(labels, pixel_map, shape):
    width, height = shape
    grid = np.empty(width * height, dtype=np.int64)
    grid[np.asarray(pixel_map)] = labels
    grid = grid.reshape(height, width)
    pairs = set()
    for a, b in ((grid[:, :-1], grid[:, 1:]), (grid[:-1, :], grid[1:, :])):
        diff = a != b
        for u, v in zip(a[diff].ravel(), b[diff].ravel()):
            pairs.add((min(int(u), int(v)), max(int(u), int(v))))
    return pairs


def asi_improve(h: Hierarchy, g: int, mode: str = "clustering",
                shape: tuple[int, int] | None = None,
                epsilon: float | None = None,
                on_round=None) -> tuple[Hierarchy, Partition]:
    """Improve the g-cluster cut of h until no split releases more error than
    the cheapest merge costs.

    Returns the improved partition together with a hierarchy it is a cut of;
    cluster dichotomies and the upper structure are convex, so in clustering
    mode the whole hierarchy is (adjacency restrictions can leave a cheap
    non-adjacent pair below a stored drop).  Total error never increases
    between rounds; ``on_round`` (if given) receives (round_index,
    exact_total_error) after every round.
    """
    n_leaves = h.n_leaves
    if not 1 <= g <= n_leaves:
        raise ValueError(f"cluster count {g} outside 1..{n_leaves}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    pixel_map = np.asarray(h.leaf_pixel_map)
    if mode == "segmentation":
        if shape is None:
            raise ValueError("segmentation mode needs the raster (width, height)")
        if shape[0] * shape[1] != n_leaves:
            raise ValueError("raster shape does not match the hierarchy")
        if not np.array_equal(np.sort(pixel_map), np.arange(n_leaves)):
            raise ValueError("hierarchy leaves must cover the raster pixels")
    eps = h.absolute_epsilon() if epsilon is None else float(epsilon)

    pool = Pool(h.channels)
    _, remap = pool.copy_hierarchy(h)
    start = h.cut_at(g)
    clusters = [remap[int(v)] for v in np.unique(start.labels)]
    # convex dichotomies from the start, so drops and the exit hierarchy are
    # consistent even for non-convex inputs
    clusters = [convexify(pool, v, eps) for v in clusters]
    labels = np.empty(n_leaves, dtype=np.int64)
    for v in clusters:
        for leaf in pool.subtree_leaves(v):
            labels[leaf] = v

    rounds = 0
    limit = max(10_000, 20 * n_leaves)
    # exit at half the tolerance so the exit hierarchy stays convex at full
    # tolerance even after costs are recomputed from exact integers
    while g >= 2:
        _, max_drop = _max_drop(pool, clusters)
        _, inc = _min_pair(pool, clusters, mode, labels, pixel_map, shape)
        if inc >= max_drop - 0.5 * eps:
            break
        # scan split candidates by descending drop; in clustering mode the
        # first candidate always yields an improving merge, but adjacency can
        # force the minimal pair to be the just-split halves (a net-zero
        # round), in which case lower-drop clusters are tried before halting
        executed = False
        for split_node, drop in _split_candidates(pool, clusters):
            left, right = pool.left[split_node], pool.right[split_node]
            clusters = [v for v in clusters if v != split_node] + [left, right]
            for child in (left, right):
                for leaf in pool.subtree_leaves(child):
                    labels[leaf] = child
            pair, pair_inc = _min_pair(pool, clusters, mode, labels, pixel_map, shape)
            if set(pair) == {left, right} or pair_inc >= drop - 0.5 * eps:
                clusters = [v for v in clusters if v not in (left, right)]
                clusters.append(split_node)
                labels[(labels == left) | (labels == right)] = split_node
                continue
            u, v = pair
            w = join_convex(pool, u, v, eps)
            clusters = [x for x in clusters if x not in (u, v)] + [w]
            labels[(labels == u) | (labels == v)] = w
            executed = True
            break
        if not executed:
            # no split releases more than its cheapest legal re-merge costs;
            # only reachable under adjacency constraints
            break
        rounds += 1
        if on_round is not None:
            on_round(rounds, sum(pool.error(x) for x in clusters))
        if rounds > limit:
            raise RuntimeError("improvement loop exceeded its round budget")

    # clusters stay intact as subtrees so the partition is a cut of the output;
    # in segmentation mode a cheap non-adjacent pair can then sit below a drop,
    # so the re-ranking must not insist on convexity (clustering mode always is)
    root = clusters[0] if len(clusters) == 1 else ward_over(pool, clusters)
    out, final_ids = compact(pool, root, h.leaf_pixel_map, eps, want_map=True,
                             strict=False)
    final_labels = np.array([final_ids[int(v)] for v in labels], dtype=np.int64)
    total = sum(pool.error(v) for v in clusters)
    return out, Partition(labels=final_labels, g=len(clusters), total_error=total)


def _max_drop(pool: Pool, clusters: list[int]) -> tuple[int, float]:
    best_node = -1
    best_drop = -1.0
    for v in sorted(clusters):
        drop = 0.0 if pool.is_leaf(v) else pool.cost[v]
        if drop > best_drop:
            best_node, best_drop = v, drop
    return best_node, best_drop


def _split_candidates(pool: Pool, clusters: list[int]):
    """Internal clusters by descending drop, ties toward the smaller id."""
    internal = [v for v in clusters if not pool.is_leaf(v)]
    return sorted(((v, pool.cost[v]) for v in internal),
                  key=lambda t: (-t[1], t[0]))


def _min_pair(pool: Pool, clusters: list[int], mode: str, labels, pixel_map, shape):
    ids = sorted(clusters)
    n = np.array([pool.n[v] for v in ids], dtype=np.float64)
    mu = np.array([pool.sums[v] for v in ids], dtype=np.float64) / n[:, None]
    if mode == "clustering":
        wmat = n[:, None] * n[None, :] / (n[:, None] + n[None, :])
        sq = ((mu[:, None, :] - mu[None, :, :]) ** 2).sum(axis=-1)
        cost = wmat * sq
        k = len(ids)
        iu = np.triu_indices(k, 1)
        flat = cost[iu]
        m = flat.min()
        cand = np.flatnonzero(flat == m)
        pairs = [(ids[int(iu[0][c])], ids[int(iu[1][c])]) for c in cand]
        return min(pairs), float(m)
    index = {v: i for i, v in enumerate(ids)}
    best = None
    best_cost = np.inf
    for u, v in sorted(_adjacent_label_pairs(labels, pixel_map, shape)):
        i, j = index[u], index[v]
        cost = n[i] * n[j] / (n[i] + n[j]) * float(((mu[i] - mu[j]) ** 2).sum())
        if cost < best_cost or (cost == best_cost and (u, v) < best):
            best_cost = cost
            best = (u, v)
    if best is None:
        raise ValueError("no adjacent cluster pairs (disconnected labeling)")
    return best, float(best_cost)
