"""Domain types shared by every module.

All values are immutable after construction and safe to share between
threads. Coordinates are normalized to the image (not the screen):
x in [0, 1] is the fraction of image width, y in [0, 1] the fraction of
image height with y growing downward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBox, UnknownCategory

UI_TYPES = ("webpage", "desktop", "mobile", "poster")
ELEMENT_CATEGORIES = ("image", "text", "face")
NORM_MODES = ("raw", "max1", "sum1")

_NORM_TOL = 1e-9


def pixel_index(coord: float, size: int) -> int:
    """Map a normalized coordinate to a pixel index in [0, size - 1].

    Uses half-open pixel cells: coordinate c falls in cell floor(c * size),
    and 1.0 clamps to the last index rather than wrapping.
    """
    if size <= 0:
        raise ValueError("size must be positive")
    return min(max(int(coord * size), 0), size - 1)


def pixel_center(index: int, size: int) -> float:
    """Normalized coordinate of a pixel center (inverse of pixel_index)."""
    return (index + 0.5) / size


@dataclass(frozen=True)
class Fixation:
    """One gaze fixation in normalized image coordinates.

    Out-of-bounds coordinates are representable (ingest filters them);
    duration must be positive and onset non-negative.
    """

    x: float
    y: float
    onset_s: float
    duration_s: float

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError(f"duration_s must be > 0, got {self.duration_s}")
        if self.onset_s < 0:
            raise ValueError(f"onset_s must be >= 0, got {self.onset_s}")

    @property
    def in_bounds(self) -> bool:
        return 0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0


@dataclass(frozen=True)
class Scanpath:
    """Ordered fixation sequence of one viewer over one image."""

    image_id: str
    viewer_id: str
    fixations: tuple[Fixation, ...]

    def __post_init__(self):
        object.__setattr__(self, "fixations", tuple(self.fixations))
        onsets = [f.onset_s for f in self.fixations]
        for prev, cur in zip(onsets, onsets[1:]):
            if cur <= prev:
                raise ValueError(
                    f"fixation onsets must be strictly increasing "
                    f"({cur} follows {prev})"
                )

    def __len__(self) -> int:
        return len(self.fixations)

    def points(self) -> np.ndarray:
        """Fixation positions as an (n, 2) float array of (x, y) rows."""
        if not self.fixations:
            return np.empty((0, 2), dtype=np.float64)
        return np.array([(f.x, f.y) for f in self.fixations], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """Non-negative W x H grid with a declared normalization mode.

    values is a read-only (height, width) float64 array. norm_mode is one
    of "raw", "max1" (peak equals 1) or "sum1" (sums to 1).
    """

    values: np.ndarray
    norm_mode: str = "raw"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {arr.shape}")
        if np.any(arr < 0):
            raise ValueError("saliency values must be non-negative")
        if self.norm_mode not in NORM_MODES:
            raise ValueError(f"norm_mode must be one of {NORM_MODES}")
        if self.norm_mode == "sum1":
            total = float(arr.sum())
            if abs(total - 1.0) > _NORM_TOL:
                raise ValueError(f"sum1 map must sum to 1, sums to {total}")
        elif self.norm_mode == "max1":
            peak = float(arr.max()) if arr.size else 0.0
            if peak != 0.0 and abs(peak - 1.0) > _NORM_TOL:
                raise ValueError(f"max1 map must peak at 1, peaks at {peak}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def is_all_zero(self) -> bool:
        return not self.values.any()

    def normalized(self, mode: str) -> "SaliencyMap":
        """Return a renormalized copy. Idempotent for a given mode."""
        if mode == "raw":
            return SaliencyMap(self.values, "raw")
        if mode == "max1":
            peak = float(self.values.max()) if self.values.size else 0.0
            if peak == 0.0:
                return SaliencyMap(self.values, "max1")
            return SaliencyMap(self.values / peak, "max1")
        if mode == "sum1":
            total = float(self.values.sum())
            if total == 0.0:
                raise ValueError("cannot sum1-normalize an all-zero map")
            return SaliencyMap(self.values / total, "sum1")
        raise ValueError(f"norm mode must be one of {NORM_MODES}")


@dataclass(frozen=True)
class ElementBox:
    """Segmentation rectangle (pixels) with a UI-element category."""

    category: str
    rect: tuple[float, float, float, float]  # x0, y0, x1, y1

    def __post_init__(self):
        if self.category not in ELEMENT_CATEGORIES:
            raise UnknownCategory(self.category)
        x0, y0, x1, y1 = self.rect
        if not (x0 < x1 and y0 < y1):
            raise DegenerateBox(f"degenerate rect {self.rect}")
        object.__setattr__(self, "rect", (float(x0), float(y0), float(x1), float(y1)))

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.rect
        return (x1 - x0) * (y1 - y0)

    def contains(self, px: float, py: float) -> bool:
        """Point-in-rect with half-open right/bottom edges."""
        x0, y0, x1, y1 = self.rect
        return x0 <= px < x1 and y0 <= py < y1


@dataclass(frozen=True)
class ImageMeta:
    """Stimulus metadata: identifier, UI type and pixel dimensions."""

    image_id: str
    ui_type: str
    width: int
    height: int
    block_id: str | None = None

    def __post_init__(self):
        if self.ui_type not in UI_TYPES:
            raise UnknownCategory(self.ui_type)
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")


@dataclass(frozen=True)
class StatTestResult:
    """Outcome of a significance test (phi effect size where applicable)."""

    statistic: float
    df: int
    p_value: float
    effect_size: float | None = None

    def __post_init__(self):
        if self.df < 1:
            raise ValueError("df must be >= 1")
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p_value must lie in [0, 1], got {self.p_value}")
