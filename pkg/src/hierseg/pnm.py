"""Portable anymap (PGM/PPM) reading and writing.

Supports the four classic variants with maxval 255: P2/P3 (ASCII) and P5/P6
(binary).  Parsing is bit-exact and writing is canonical (fixed whitespace),
so a file written here reads back byte-identically.  The three failure modes
the format contract distinguishes get their own exception types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import ClusterStats

__all__ = [
    "PnmError",
    "UnsupportedPnmFormat",
    "PnmMaxvalError",
    "TruncatedPnmError",
    "ImageRaster",
    "load_image",
    "parse_pnm",
    "save_image",
    "encode_pnm",
    "image_stats",
]


class PnmError(ValueError):
    """Base class for portable anymap format errors."""


class UnsupportedPnmFormat(PnmError):
    """Magic number is not one of P2, P3, P5, P6."""


class PnmMaxvalError(PnmError):
    """Sample depth other than maxval 255."""


class TruncatedPnmError(PnmError):
    """Header or pixel payload ends early."""


_GRAY = {"P2", "P5"}
_COLOR = {"P3", "P6"}
_ASCII = {"P2", "P3"}


@dataclass
class ImageRaster:
    """8-bit raster with its source format variant.

    pixels has shape (height, width, channels), channels 1 or 3.
    """

    width: int
    height: int
    channels: int
    pixels: np.ndarray
    magic: str = "P5"

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, self.channels
        )
        if self.width * self.height < 1:
            raise ValueError("raster must contain at least one pixel")
        if self.channels not in (1, 3):
            raise ValueError("channel count must be 1 or 3")

    def pixel_rows(self) -> np.ndarray:
        """Row-major (N, channels) view of the samples."""
        return self.pixels.reshape(-1, self.channels)


def load_image(path) -> ImageRaster:
    with open(path, "rb") as f:
        return parse_pnm(f.read())


def parse_pnm(data: bytes) -> ImageRaster:
    magic = data[:2].decode("ascii", errors="replace")
    if magic not in _GRAY | _COLOR:
        raise UnsupportedPnmFormat(f"unsupported magic number {magic!r}")
    channels = 1 if magic in _GRAY else 3
    pos = 2
    header = []
    while len(header) < 3:
        tok, pos = _next_token(data, pos)
        header.append(tok)
    width, height, maxval = (int(t) for t in header)
    if width < 1 or height < 1:
        raise PnmError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PnmMaxvalError(f"maxval {maxval} is not supported (must be 255)")
    count = width * height * channels
    if magic in _ASCII:
        try:
            samples = [int(t) for t in data[pos:].split()]
        except ValueError as exc:
            raise PnmError(f"bad ASCII sample: {exc}") from None
        if len(samples) < count:
            raise TruncatedPnmError(
                f"expected {count} samples, found {len(samples)}"
            )
        samples = samples[:count]
        if min(samples) < 0 or max(samples) > 255:
            raise PnmError("sample out of range 0..255")
        flat = np.array(samples, dtype=np.uint8)
    else:
        # exactly one whitespace byte separates maxval from the payload
        pos += 1
        payload = data[pos:pos + count]
        if len(payload) < count:
            raise TruncatedPnmError(
                f"expected {count} payload bytes, found {len(payload)}"
            )
        flat = np.frombuffer(payload, dtype=np.uint8)
    return ImageRaster(
        width=width,
        height=height,
        channels=channels,
        pixels=flat.reshape(height, width, channels),
        magic=magic,
    )


def _next_token(data: bytes, pos: int):
    n = len(data)
    while pos < n:
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise TruncatedPnmError("header ends before width/height/maxval")
    start = pos
    while pos < n and not data[pos:pos + 1].isspace():
        pos += 1
    return data[start:pos], pos


def encode_pnm(image: ImageRaster, magic: str | None = None) -> bytes:
    """Canonical encoding; the variant defaults to the raster's own."""
    magic = image.magic if magic is None else magic
    if magic not in _GRAY | _COLOR:
        raise UnsupportedPnmFormat(f"unsupported magic number {magic!r}")
    want = 1 if magic in _GRAY else 3
    if want != image.channels:
        raise PnmError(
            f"{magic} holds {want}-channel data, raster has {image.channels}"
        )
    header = f"{magic}\n{image.width} {image.height}\n255\n".encode("ascii")
    flat = image.pixels.reshape(image.height, -1)
    if magic in _ASCII:
        body = "\n".join(" ".join(str(int(v)) for v in row) for row in flat)
        return header + body.encode("ascii") + b"\n"
    return header + flat.tobytes()


def save_image(image: ImageRaster, path, magic: str | None = None) -> None:
    with open(path, "wb") as f:
        f.write(encode_pnm(image, magic))


def image_stats(image: ImageRaster) -> ClusterStats:
    """Exact whole-image cluster statistics."""
    px = image.pixel_rows().astype(np.int64)
    return ClusterStats(
        int(px.shape[0]),
        tuple(int(v) for v in px.sum(axis=0)),
        int((px * px).sum()),
    )
