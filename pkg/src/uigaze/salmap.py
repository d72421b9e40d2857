"""Duration-weighted saliency maps from fixations, plus map file formats.

A fixation map accumulates each included fixation's duration at its pixel
and blurs the result with a truncated Gaussian kernel; the map is then
peak-normalized. Maps are written either as 16-bit grayscale PNG or as a
small binary float-grid format (magic, dimensions, norm mode, float32
row-major data).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

from .core import ImageMeta, SaliencyMap, pixel_index

DEFAULT_SIGMA_FRAC = 0.02


@dataclass(frozen=True)
class GaussianKernelSpec:
    """Blur kernel: standard deviation in pixels and truncation radius in
    multiples of sigma."""

    sigma_px: float
    truncation_radius: float = 3.0

    def __post_init__(self):
        if not self.sigma_px > 0:
            raise ValueError("sigma_px must be positive")
        if not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be positive")


def default_sigma_px(width: int, height: int, frac: float = DEFAULT_SIGMA_FRAC) -> float:
    """Default kernel width: a fraction of the image diagonal, roughly one
    degree of visual angle at a desktop viewing distance."""
    return frac * math.hypot(width, height)


def _included(scanpaths, meta: ImageMeta, horizon_s: float):
    for sp in scanpaths:
        if sp.image_id != meta.image_id:
            raise ValueError(
                f"scanpath for image {sp.image_id!r} passed with meta "
                f"{meta.image_id!r}"
            )
        for fix in sp.fixations:
            if fix.onset_s < horizon_s:
                yield fix


def fixation_map(
    scanpaths,
    meta: ImageMeta,
    kernel: GaussianKernelSpec | None = None,
    horizon_s: float = math.inf,
) -> SaliencyMap:
    """Duration-weighted, Gaussian-blurred fixation map, peak-normalized.

    Fixations with onset before horizon_s contribute their duration at
    their pixel. With no included fixations the result is an all-zero map
    (flagged via SaliencyMap.is_all_zero), not an error.
    """
    if kernel is None:
        kernel = GaussianKernelSpec(sigma_px=default_sigma_px(meta.width, meta.height))
    grid = np.zeros((meta.height, meta.width), dtype=np.float64)
    for fix in _included(scanpaths, meta, horizon_s):
        col = pixel_index(fix.x, meta.width)
        row = pixel_index(fix.y, meta.height)
        grid[row, col] += fix.duration_s
    blurred = gaussian_filter(
        grid, sigma=kernel.sigma_px, truncate=kernel.truncation_radius, mode="constant"
    )
    np.clip(blurred, 0.0, None, out=blurred)
    return SaliencyMap(blurred, "raw").normalized("max1")


def binary_fixation_points(scanpaths, meta: ImageMeta, horizon_s: float = math.inf) -> set:
    """Pixel coordinates (x, y) of included fixations; duplicates collapse."""
    return {
        (pixel_index(fix.x, meta.width), pixel_index(fix.y, meta.height))
        for fix in _included(scanpaths, meta, horizon_s)
    }


# --- map file formats -----------------------------------------------------

_GRID_MAGIC = b"SMAP"
_GRID_VERSION = 1
_NORM_CODES = {"raw": 0, "max1": 1, "sum1": 2}
_NORM_NAMES = {v: k for k, v in _NORM_CODES.items()}
_GRID_HEADER = struct.Struct("<4sBBHII")  # magic, version, norm, pad, width, height


def write_grid(path, salmap: SaliencyMap):
    """Write a map as the flat binary float-grid format."""
    header = _GRID_HEADER.pack(
        _GRID_MAGIC,
        _GRID_VERSION,
        _NORM_CODES[salmap.norm_mode],
        0,
        salmap.width,
        salmap.height,
    )
    data = salmap.values.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def read_grid(path) -> SaliencyMap:
    """Read a map written by write_grid."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _GRID_HEADER.size:
        raise ValueError(f"{path}: truncated grid file")
    magic, version, norm, _, width, height = _GRID_HEADER.unpack_from(raw)
    if magic != _GRID_MAGIC or version != _GRID_VERSION:
        raise ValueError(f"{path}: not a float-grid map file")
    expected = _GRID_HEADER.size + 4 * width * height
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f4", offset=_GRID_HEADER.size).astype(np.float64)
    values = values.reshape((height, width))
    # float32 round-trip can nudge a normalized peak/sum off by > 1e-9
    return SaliencyMap(np.clip(values, 0.0, None), "raw").normalized(_NORM_NAMES[norm])


def write_png16(path, salmap: SaliencyMap):
    """Write a map as 16-bit grayscale PNG, scaled so the peak is 65535."""
    values = salmap.values
    peak = values.max()
    scaled = values / peak if peak > 0 else values
    arr = np.round(scaled * 65535.0).astype(np.uint16)
    Image.fromarray(arr).save(path)


def read_png_map(path) -> SaliencyMap:
    """Read a grayscale PNG (8- or 16-bit) as a raw saliency map."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("I"), dtype=np.float64)
    return SaliencyMap(np.clip(arr, 0.0, None), "raw")
