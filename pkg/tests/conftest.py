import numpy as np
import pytest

from hierseg import ClusterStats, ImageRaster, build_from_merges, stats_of_pixels


def gray(*values) -> list[ClusterStats]:
    """Single-pixel grayscale leaf stats."""
    return [stats_of_pixels([(int(v),)]) for v in values]


def random_items(rng, n, channels) -> list[ClusterStats]:
    px = rng.integers(0, 256, size=(n, channels))
    return [stats_of_pixels([tuple(int(v) for v in p)]) for p in px]


def random_hierarchy(rng, items):
    """Hierarchy with a uniformly random merge order (generally non-convex)."""
    n = len(items)
    live = list(range(n))
    merges = []
    nid = n
    while len(live) > 1:
        i, j = sorted(rng.choice(len(live), size=2, replace=False))
        u, v = live[i], live[j]
        live.pop(j)
        live.pop(i)
        merges.append((u, v))
        live.append(nid)
        nid += 1
    return build_from_merges(items, merges)


def gray_image(array, magic="P5") -> ImageRaster:
    a = np.asarray(array, dtype=np.uint8)
    if a.ndim == 1:
        a = a[None, :]
    return ImageRaster(width=a.shape[1], height=a.shape[0], channels=1,
                       pixels=a[..., None], magic=magic)


def smooth_random_image(rng, width, height, channels=1) -> ImageRaster:
    """Piecewise-smooth random test image: planes plus Gaussian blobs plus
    light noise, the kind of content region merging is meant for."""
    y, x = np.mgrid[0:height, 0:width].astype(float)
    out = np.empty((height, width, channels))
    for ch in range(channels):
        img = rng.uniform(60, 190) + rng.uniform(-2, 2) * x + rng.uniform(-2, 2) * y
        for _ in range(3):
            cx = rng.uniform(0, width)
            cy = rng.uniform(0, height)
            amp = rng.uniform(-80, 80)
            w = rng.uniform(2, max(width, height) / 2)
            img += amp * np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / (2 * w * w)))
        out[..., ch] = img + rng.normal(0, 3, size=img.shape)
    pixels = np.clip(out, 0, 255).astype(np.uint8)
    return ImageRaster(width=width, height=height, channels=channels,
                       pixels=pixels, magic="P5" if channels == 1 else "P6")


@pytest.fixture(scope="session")
def natural_image() -> ImageRaster:
    """128x128 crop of a standard natural test photograph."""
    import skimage.data

    crop = skimage.data.camera()[192:320, 192:320]
    return ImageRaster(width=128, height=128, channels=1,
                       pixels=crop[..., None], magic="P5")
