"""Baseline scanpath generation: winner-take-all selection over a saliency
map with inhibition of return.

Each step selects the peak of a working map, then suppresses the selected
neighborhood with a multiplicative Gaussian mask. The plain variant keeps
every past fixation fully suppressed; the decaying variant weights the
i-th most recent fixation by 1 - 0.1 * (i - 1), clamped at zero, so old
locations become selectable again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Fixation, SaliencyMap, Scanpath, pixel_center
from .errors import AllZeroMap, NFixZero
from .salmap import default_sigma_px

DEFAULT_N_FIX = 15
DEFAULT_TOTAL_DURATION_S = 7.0
DECAY_STEP = 0.1
DECAY_HISTORY_WINDOW = 10


@dataclass(frozen=True)
class IorSpec:
    """Inhibition-of-return parameters.

    history_window of None means every past fixation stays in play;
    decay_step 0 gives constant unit weights (plain variant).
    """

    sigma_px: float
    history_window: int | None = None
    decay_step: float = 0.0

    def __post_init__(self):
        if not self.sigma_px > 0:
            raise ValueError("sigma_px must be positive")
        if self.history_window is not None and self.history_window < 1:
            raise ValueError("history_window must be >= 1")
        if self.decay_step < 0:
            raise ValueError("decay_step must be non-negative")

    @classmethod
    def plain(cls, sigma_px: float) -> "IorSpec":
        return cls(sigma_px=sigma_px)

    @classmethod
    def decaying(
        cls,
        sigma_px: float,
        history_window: int = DECAY_HISTORY_WINDOW,
        decay_step: float = DECAY_STEP,
    ) -> "IorSpec":
        return cls(sigma_px=sigma_px, history_window=history_window, decay_step=decay_step)

    def weight(self, age: int) -> float:
        """Suppression weight of the fixation made `age` selections ago
        (age 1 is the most recent); negative decayed weights clamp to 0."""
        if age < 1:
            raise ValueError("age counts from 1")
        return max(0.0, 1.0 - self.decay_step * (age - 1))


def argmax_with_ties(salmap) -> tuple[int, int]:
    """Pixel (x, y) of the maximum value; ties break to the smallest
    row-major index."""
    values = salmap.values if isinstance(salmap, SaliencyMap) else np.asarray(salmap)
    flat = int(np.argmax(values))
    row, col = divmod(flat, values.shape[1])
    return col, row


def _gaussian_bump(shape, col, row, sigma):
    h, w = shape
    ys = np.arange(h)[:, None] - row
    xs = np.arange(w)[None, :] - col
    return np.exp(-(xs**2 + ys**2) / (2.0 * sigma**2))


def wta_ior_scanpath(
    salmap: SaliencyMap,
    n_fix: int = DEFAULT_N_FIX,
    ior: IorSpec | None = None,
    image_id: str | None = None,
    viewer_id: str = "model",
    total_duration_s: float = DEFAULT_TOTAL_DURATION_S,
) -> Scanpath:
    """Generate exactly n_fix fixations by repeated winner-take-all
    selection with inhibition of return.

    The working map is recomputed each step as the base map times
    (1 - w * G(center, sigma)) for every fixation in the active history,
    where w follows the IorSpec decay. Fixations get uniform synthetic
    durations summing to total_duration_s so the result is a valid input
    to every metric. Deterministic for identical inputs.
    """
    if n_fix < 1:
        raise NFixZero(f"n_fix must be >= 1, got {n_fix}")
    base = salmap.values if isinstance(salmap, SaliencyMap) else np.asarray(salmap, dtype=np.float64)
    if not base.any():
        raise AllZeroMap("cannot generate fixations from an all-zero map")
    if ior is None:
        h, w = base.shape
        ior = IorSpec.plain(default_sigma_px(w, h))

    h, w = base.shape
    masks: list[np.ndarray] = []  # Gaussian bump per selected fixation, oldest first
    pixels: list[tuple[int, int]] = []
    for _ in range(n_fix):
        working = base.copy()
        active = masks if ior.history_window is None else masks[-ior.history_window :]
        for age, bump in enumerate(reversed(active), start=1):
            weight = ior.weight(age)
            if weight <= 0.0:
                continue
            working *= 1.0 - weight * bump
        col, row = argmax_with_ties(working)
        pixels.append((col, row))
        masks.append(_gaussian_bump(base.shape, col, row, ior.sigma_px))

    duration = total_duration_s / n_fix
    fixations = tuple(
        Fixation(
            x=pixel_center(col, w),
            y=pixel_center(row, h),
            onset_s=i * duration,
            duration_s=duration,
        )
        for i, (col, row) in enumerate(pixels)
    )
    return Scanpath(
        image_id=image_id if image_id is not None else "generated",
        viewer_id=viewer_id,
        fixations=fixations,
    )
