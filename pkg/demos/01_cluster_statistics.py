"""Exact cluster statistics and reversible merging.

Every error number in hierseg comes from three integers per cluster: the
pixel count, the per-channel intensity sums, and the summed squared norm.
This demo walks through the arithmetic: errors from the closed form, the
merge increment, and why merging is exactly reversible.
"""

import numpy as np

from hierseg import (
    cluster_error,
    merge_increment,
    merge_stats,
    sigma_from_error,
    stats_of_pixels,
    subtract_stats,
)

rng = np.random.default_rng(0)

# Two tiny color clusters.
a = stats_of_pixels([(0, 0, 0), (4, 0, 0)])
b = stats_of_pixels([(10, 10, 10)])
print("cluster a:", a)
print("cluster b:", b)
print("E(a) =", cluster_error(a), " E(b) =", cluster_error(b))

# The price of uniting them, straight from counts and means.
inc = merge_increment(a, b)
union = merge_stats(a, b)
print("\nmerge increment:", inc)
print("check against error difference:",
      cluster_error(union) - cluster_error(a) - cluster_error(b))

# Merging is exact integer arithmetic, so it undoes perfectly.
print("\nsubtract b back out:", subtract_stats(union, b) == a)

# The standard-deviation view used throughout the curves: E = c * N * sigma^2.
sigma = sigma_from_error(cluster_error(union), union.n, union.channels)
print("sigma of the union:", sigma)
print("c * N * sigma^2   :", union.channels * union.n * sigma ** 2)

# At scale: a million random pixels, error matches a direct two-pass sum.
px = rng.integers(0, 256, size=(1_000_000, 3))
s = stats_of_pixels(map(tuple, px))
direct = float(((px - px.mean(axis=0)) ** 2).sum())
print("\n1e6 pixels, closed form:", cluster_error(s))
print("1e6 pixels, direct sum: ", direct)
