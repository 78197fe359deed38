"""Fixed-size improvement: rescuing a bad 2-cluster partition.

Four grayscale pixels 0, 1, 10, 11 are paired adversarially as {0,10} and
{1,11} (error 100).  The improvement loop alternates the maximal-drop split
with the minimal-increment combined merge until no split releases more error
than the cheapest merge costs.  Because each merge restructures the merged
cluster, the released error compounds and the loop lands on the true optimum
{0,1},{10,11} with error 1.
"""

import numpy as np

from hierseg import (
    asi_improve,
    best_merge,
    best_split,
    build_from_merges,
    optimal_partition,
    stats_of_pixels,
)

items = [stats_of_pixels([(v,)]) for v in (0, 1, 10, 11)]
# leaves 0..3 hold pixels 0, 1, 10, 11; pair leaf 0 with 2 and 1 with 3
adversarial = build_from_merges(items, [(0, 2), (1, 3), (4, 5)])

start = adversarial.cut_at(2)
print("start blocks:",
      [sorted(np.flatnonzero(start.labels == v)) for v in np.unique(start.labels)])
print("start error:", start.total_error)

trace = []
improved, final = asi_improve(adversarial, 2,
                              on_round=lambda r, e: trace.append(e))
print("\nenergy per round:", [round(e, 3) for e in trace])
print("final blocks:",
      [sorted(np.flatnonzero(final.labels == v)) for v in np.unique(final.labels)])
print("final error:", final.total_error)

_, e_opt = optimal_partition(items, 2)
print("exhaustive optimum:", e_opt)

# The exit criterion: the cheapest merge now costs more than any split frees.
_, drop = best_split(final, improved)
_, inc = best_merge(final, improved)
print(f"\nmax divide drop {drop}  <=  min merge increment {inc}")
print("output hierarchy convex:", improved.is_convex()[0])
