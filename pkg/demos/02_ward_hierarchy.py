"""Ward clustering and the dendrogram of nested approximations.

A hierarchy built by Ward's method stores all N approximations of an item set
in one structure of 2N-1 nodes.  Cutting it at any level g gives the g-cluster
partition; the error curve across levels is convex (merge costs never invert).
"""

import numpy as np

from hierseg import stats_of_pixels, ward_cluster

rng = np.random.default_rng(1)

# Three well-separated grayscale blobs.
values = np.concatenate([
    rng.normal(40, 4, 30),
    rng.normal(128, 4, 30),
    rng.normal(220, 4, 30),
]).clip(0, 255).astype(int)
items = [stats_of_pixels([(int(v),)]) for v in values]

h = ward_cluster(items)
print(f"{h.n_leaves} items -> {h.n_nodes} nodes, root id {h.root}")

ok, _ = h.is_convex()
print("convex:", ok)

curve = h.error_curve(10)
print("\n g      E_g        sigma_g")
for g, e, s in curve.rows():
    print(f"{g:2d}  {e:12.2f}  {s:8.3f}")

# The elbow at g=3 is visible: dividing past the three blobs buys little.
p = h.cut_at(3)
print("\ncut at g=3, cluster sizes:",
      sorted(np.bincount(np.unique(p.labels, return_inverse=True)[1]).tolist()))
print("total error at g=3:", p.total_error)

# Divide is free and reversible: inspect the root's stored dichotomy.
left, right, drop = h.divide(h.root)
print("\nroot divides into", h.stats(left).n, "+", h.stats(right).n,
      "items, releasing", -drop, "of error")
