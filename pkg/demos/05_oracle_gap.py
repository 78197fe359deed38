"""How close do the hierarchical methods get to the exhaustive optimum?

For instances small enough to enumerate every set partition, the oracle gives
the exact minimal error at every cluster count.  Hierarchical methods cannot
beat it; the interesting question is the size of the gap, and how much of the
gap restructuring recovers on a bad input hierarchy.
"""

import numpy as np

from hierseg import (
    build_from_merges,
    optimal_curve,
    restructure,
    stats_of_pixels,
    ward_cluster,
)

rng = np.random.default_rng(4)
n = 8
values = rng.integers(0, 256, size=n)
items = [stats_of_pixels([(int(v),)]) for v in values]
print("pixels:", values.tolist())

optimal = optimal_curve(items, n)

ward = ward_cluster(items).error_curve(n)

# A deliberately bad hierarchy: uniformly random merge order.
live = list(range(n))
merges = []
nid = n
while len(live) > 1:
    i, j = sorted(rng.choice(len(live), size=2, replace=False))
    merges.append((live[i], live[j]))
    live.pop(j), live.pop(i)
    live.append(nid)
    nid += 1
bad = build_from_merges(items, merges)
fixed = restructure(bad)

bad_curve = bad.error_curve(n)
fixed_curve = fixed.error_curve(n)

print("\n g   optimal      ward    random tree   restructured")
for g in range(1, n + 1):
    print(f"{g:2d}  {optimal.error[g-1]:9.2f} {ward.error[g-1]:9.2f} "
          f"{bad_curve.error[g-1]:12.2f} {fixed_curve.error[g-1]:13.2f}")

gap_bad = (bad_curve.error - optimal.error).sum()
gap_fix = (fixed_curve.error - optimal.error).sum()
print(f"\nsummed gap above optimal: random tree {gap_bad:.2f}, "
      f"after restructuring {gap_fix:.2f}")
