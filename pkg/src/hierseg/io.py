"""Rendering and text artifacts: approximation images, curve CSV, dumps.

The CSV boundary is deliberately plain (header ``g,E,sigma``, 9 significant
digits) so external tools can plot the curves; hierarchy dumps follow the
line format documented in ``Hierarchy.dump_text``.
"""

from __future__ import annotations

import numpy as np

from .hierarchy import DumpedHierarchy, ErrorCurve, Hierarchy, Partition, parse_dump_text
from .pnm import ImageRaster, save_image

__all__ = [
    "render_partition",
    "partition_raster",
    "export_curve",
    "read_curve",
    "write_hierarchy_dump",
    "read_hierarchy_dump",
]


def partition_raster(image: ImageRaster, labels: np.ndarray) -> ImageRaster:
    """Replace every pixel by its cluster's mean color.

    Means are exact rationals from integer sums; quantization rounds half up
    (floor(mean + 0.5)), the only place the engine rounds at all.
    """
    n = image.width * image.height
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got shape {labels.shape}")
    px = image.pixel_rows().astype(np.int64)
    _, inv = np.unique(labels, return_inverse=True)
    k = int(inv.max()) + 1
    sums = np.zeros((k, image.channels), dtype=np.int64)
    counts = np.bincount(inv, minlength=k).astype(np.int64)
    np.add.at(sums, inv, px)
    means = sums / counts[:, None]
    quantized = np.floor(means + 0.5).astype(np.uint8)
    out = quantized[inv].reshape(image.height, image.width, image.channels)
    return ImageRaster(
        width=image.width,
        height=image.height,
        channels=image.channels,
        pixels=out,
        magic=image.magic,
    )


def render_partition(image: ImageRaster, partition: Partition, path) -> None:
    """Write the piecewise-constant approximation for a partition.

    The output format matches the input family and variant, so rendering the
    all-singletons partition reproduces the input file byte for byte.
    """
    save_image(partition_raster(image, partition.labels), path)


def export_curve(curve: ErrorCurve, path) -> None:
    """CSV with header ``g,E,sigma``; E and sigma carry 9 significant digits."""
    lines = ["g,E,sigma"]
    for g, e, s in curve.rows():
        lines.append(f"{g},{e:.9g},{s:.9g}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def read_curve(path) -> ErrorCurve:
    with open(path, "r", encoding="ascii") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines or lines[0] != "g,E,sigma":
        raise ValueError("curve file must start with the header 'g,E,sigma'")
    gs, errors, sigmas = [], [], []
    for ln in lines[1:]:
        g, e, s = ln.split(",")
        gs.append(int(g))
        errors.append(float(e))
        sigmas.append(float(s))
    return ErrorCurve(
        g=np.array(gs, dtype=np.int64),
        error=np.array(errors),
        sigma=np.array(sigmas),
    )


def write_hierarchy_dump(h: Hierarchy | DumpedHierarchy, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(h.dump_text())


def read_hierarchy_dump(path) -> DumpedHierarchy:
    with open(path, "r", encoding="ascii") as f:
        return parse_dump_text(f.read())
