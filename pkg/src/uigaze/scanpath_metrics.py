"""Scanpath comparison metrics.

Six measures over pairs of fixation sequences: dynamic time warping,
time-delay embedding distance, Eyenalysis double-mapping distance, and the
cross-recurrence family (recurrence rate, determinism, center of
recurrence mass). Distances are Euclidean in normalized image coordinates
unless the caller rescales the inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Scanpath
from .errors import EmptyScanpath, NoRecurrences, ScanpathShorterThanK

#: Normalized diagonal of a square image in unit coordinates.
UNIT_DIAGONAL = math.sqrt(2.0)

#: Fraction of the image size used for the recurrence threshold.
DEFAULT_REC_THRESHOLD_FRAC = 0.05

DEFAULT_TDE_K = 3
DEFAULT_DET_MIN_LINE = 2


def _as_points(path) -> np.ndarray:
    """Coerce a Scanpath or (n, 2) array-like to a float array of points."""
    pts = path.points() if isinstance(path, Scanpath) else np.asarray(path, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
    if len(pts) == 0:
        raise EmptyScanpath("scanpath has no fixations")
    return pts


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)


def dtw(a, b) -> float:
    """Dynamic time warping cost between two scanpaths.

    Classic boundary-aligned dynamic program with match / insert / delete
    moves and Euclidean cost per matched pair. No window constraint and no
    length normalization. Symmetric in its arguments.
    """
    pa, pb = _as_points(a), _as_points(b)
    d = _pairwise_distances(pa, pb)
    n, m = d.shape
    acc = np.full((n, m), np.inf)
    acc[0, 0] = d[0, 0]
    for j in range(1, m):
        acc[0, j] = d[0, j] + acc[0, j - 1]
    for i in range(1, n):
        acc[i, 0] = d[i, 0] + acc[i - 1, 0]
        for j in range(1, m):
            acc[i, j] = d[i, j] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n - 1, m - 1])


def tde(a, b, k: int = DEFAULT_TDE_K) -> float:
    """Time-delay embedding distance from ground truth a to prediction b.

    Every length-k consecutive window is flattened to a 2k-vector; for each
    window of a the closest window of b is found (Euclidean distance scaled
    by k) and the minima are averaged.
    """
    pa, pb = _as_points(a), _as_points(b)
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(pa) < k or len(pb) < k:
        raise ScanpathShorterThanK(
            f"k = {k} exceeds a scanpath length ({len(pa)}, {len(pb)})"
        )
    wa = np.lib.stride_tricks.sliding_window_view(pa, (k, 2)).reshape(-1, 2 * k)
    wb = np.lib.stride_tricks.sliding_window_view(pb, (k, 2)).reshape(-1, 2 * k)
    diff = wa[:, None, :] - wb[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2)) / k
    return float(dist.min(axis=1).mean())


def eyenalysis(a, b) -> float:
    """Double-mapping distance: each fixation is paired with its spatially
    nearest fixation on the other scanpath, both ways; the paired distances
    are summed and divided by the total number of fixations."""
    pa, pb = _as_points(a), _as_points(b)
    d = _pairwise_distances(pa, pb)
    total = float(d.min(axis=1).sum() + d.min(axis=0).sum())
    return total / (len(pa) + len(pb))


@dataclass(frozen=True, eq=False)
class RecurrenceMatrix:
    """Boolean cross-recurrence grid over the truncated common length."""

    cells: np.ndarray
    threshold: float

    def __post_init__(self):
        arr = np.asarray(self.cells, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("cells must be a square matrix")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @property
    def n(self) -> int:
        return self.cells.shape[0]


def recurrence_matrix(
    a,
    b,
    image_diag_norm: float = UNIT_DIAGONAL,
    threshold_frac: float = DEFAULT_REC_THRESHOLD_FRAC,
) -> RecurrenceMatrix:
    """Cross-recurrence matrix on the first min(|a|, |b|) fixations of each.

    Cell (i, j) is true when the i-th fixation of a and the j-th of b lie
    closer than threshold_frac times the image size (its normalized
    diagonal by default).
    """
    pa, pb = _as_points(a), _as_points(b)
    n = min(len(pa), len(pb))
    threshold = threshold_frac * image_diag_norm
    d = _pairwise_distances(pa[:n], pb[:n])
    return RecurrenceMatrix(cells=d < threshold, threshold=threshold)


def rec(m: RecurrenceMatrix) -> float:
    """Recurrence rate: percentage of true cells among all n^2 pairs."""
    return 100.0 * float(m.cells.sum()) / m.n**2


def det(m: RecurrenceMatrix, min_line: int = DEFAULT_DET_MIN_LINE) -> float:
    """Determinism: percentage of recurrences lying on a diagonal run of
    length >= min_line. Zero when the matrix has no recurrences."""
    if min_line < 2:
        raise ValueError("min_line must be >= 2")
    total = int(m.cells.sum())
    if total == 0:
        return 0.0
    on_lines = 0
    for offset in range(-(m.n - 1), m.n):
        diag = np.diagonal(m.cells, offset)
        run = 0
        for val in np.append(diag, False):
            if val:
                run += 1
            else:
                if run >= min_line:
                    on_lines += run
                run = 0
    return 100.0 * on_lines / total


def corm(m: RecurrenceMatrix) -> float:
    """Center of recurrence mass: mean signed lag of recurrences, scaled to
    [-100, 100]. Small when recurrent pairs are close in time."""
    rows, cols = np.nonzero(m.cells)
    count = len(rows)
    if count == 0:
        raise NoRecurrences("recurrence matrix has no true cells")
    if m.n == 1:
        return 0.0
    return 100.0 * float((cols - rows).sum()) / ((m.n - 1) * count)
