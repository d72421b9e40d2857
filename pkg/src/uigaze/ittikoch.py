"""Bottom-up conspicuity maps from intensity, color opponency, and
orientation channels.

Feature maps come from center-surround differences across a dyadic
Gaussian pyramid; each map passes through an iterative
difference-of-Gaussians normalization that promotes maps with a few
strong peaks, and the three channel conspicuities are averaged into one
peak-normalized saliency map. Deterministic for a fixed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
from scipy.ndimage import gaussian_filter

from .core import SaliencyMap
from .errors import ImageTooSmall

MIN_IMAGE_PX = 64

# Iterative normalization constants: local excitation vs broad inhibition.
_EXC_COEF = 0.5**2
_INH_COEF = 1.5**2
_EXC_SIGMA_FRAC = 0.02
_INH_SIGMA_FRAC = 0.25
_GLOBAL_INHIBITION = 0.02

# Gabor kernel parameters for the orientation channel.
_GABOR_KSIZE = 9
_GABOR_SIGMA = 2.0
_GABOR_LAMBDA = 5.0
_GABOR_GAMMA = 1.0

# Fraction of peak intensity below which hue is considered unreliable.
_COLOR_INTENSITY_FLOOR = 0.1


@dataclass(frozen=True)
class IttiKochConfig:
    pyramid_levels: int = 9
    center_scales: tuple[int, ...] = (2, 3, 4)
    surround_deltas: tuple[int, ...] = (3, 4)
    orientations_deg: tuple[float, ...] = (0.0, 45.0, 90.0, 135.0)
    norm_iterations: int = 3
    output_scale: int = 4

    def __post_init__(self):
        max_surround = max(self.center_scales) + max(self.surround_deltas)
        if max_surround >= self.pyramid_levels:
            raise ValueError(
                f"pyramid_levels = {self.pyramid_levels} too shallow for "
                f"surround scale {max_surround}"
            )
        if self.output_scale >= self.pyramid_levels:
            raise ValueError("output_scale must be a pyramid level")


DEFAULT_CONFIG = IttiKochConfig()


def _gaussian_pyramid(base: np.ndarray, levels: int) -> list[np.ndarray]:
    pyr = [base]
    for _ in range(levels - 1):
        pyr.append(cv2.pyrDown(pyr[-1]))
    return pyr


def _resize_to(src: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if src.shape == shape:
        return src
    return cv2.resize(src, (shape[1], shape[0]), interpolation=cv2.INTER_LINEAR)


def _center_surround(pyr: list[np.ndarray], config: IttiKochConfig) -> list[np.ndarray]:
    """Across-scale absolute differences |center - surround| per (c, delta)."""
    maps = []
    for c in config.center_scales:
        for delta in config.surround_deltas:
            surround = _resize_to(pyr[c + delta], pyr[c].shape)
            maps.append(np.abs(pyr[c] - surround))
    return maps


#: Peaks at or below this level are floating-point dust, not features;
#: rescaling them to 1 would amplify noise into spurious conspicuity.
_PEAK_FLOOR = 1e-9


def _iterative_normalize(m: np.ndarray, iterations: int) -> np.ndarray:
    """Difference-of-Gaussians competition that suppresses uniformly busy
    maps while keeping isolated peaks."""
    peak = float(m.max())
    if peak <= _PEAK_FLOOR:
        return np.zeros_like(m)
    m = m / peak
    sigma_ex = _EXC_SIGMA_FRAC * m.shape[1]
    sigma_inh = _INH_SIGMA_FRAC * m.shape[1]
    for _ in range(iterations):
        excitation = _EXC_COEF * gaussian_filter(m, sigma_ex, mode="nearest")
        inhibition = _INH_COEF * gaussian_filter(m, sigma_inh, mode="nearest")
        m = np.clip(m + excitation - inhibition - _GLOBAL_INHIBITION, 0.0, None)
    return m


def _opponency_channels(r, g, b, intensity):
    """Red-green and blue-yellow opponency from intensity-rescaled RGB.

    Hue is unreliable where intensity is very low, so such pixels carry no
    color signal.
    """
    peak = float(intensity.max())
    if peak <= 0.0:
        zeros = np.zeros_like(intensity)
        return zeros, zeros.copy()
    mask = intensity > _COLOR_INTENSITY_FLOOR * peak
    with np.errstate(divide="ignore", invalid="ignore"):
        rn = np.where(mask, r / intensity, 0.0)
        gn = np.where(mask, g / intensity, 0.0)
        bn = np.where(mask, b / intensity, 0.0)
    red = np.clip(rn - (gn + bn) / 2.0, 0.0, None)
    green = np.clip(gn - (rn + bn) / 2.0, 0.0, None)
    blue = np.clip(bn - (rn + gn) / 2.0, 0.0, None)
    yellow = np.clip((rn + gn) / 2.0 - np.abs(rn - gn) / 2.0 - bn, 0.0, None)
    return red - green, blue - yellow


def _orientation_pyramids(intensity_pyr, config):
    """Gabor energy pyramids of the intensity channel, one per orientation.

    Levels below the finest center scale are never consumed by the
    center-surround stage, so they carry placeholders.
    """
    first_used = min(config.center_scales)
    pyramids = []
    for theta_deg in config.orientations_deg:
        kernel = cv2.getGaborKernel(
            (_GABOR_KSIZE, _GABOR_KSIZE),
            _GABOR_SIGMA,
            np.deg2rad(theta_deg),
            _GABOR_LAMBDA,
            _GABOR_GAMMA,
            0.0,
            ktype=cv2.CV_64F,
        )
        pyramids.append(
            [
                np.abs(cv2.filter2D(level, -1, kernel)) if i >= first_used else level
                for i, level in enumerate(intensity_pyr)
            ]
        )
    return pyramids


def channel_conspicuities(
    image: np.ndarray, config: IttiKochConfig = DEFAULT_CONFIG
) -> dict[str, np.ndarray]:
    """Per-channel conspicuity maps at the output scale, before combination.

    Returns {"intensity": ..., "color": ..., "orientation": ...}; exposed
    so channel contributions can be inspected and compared.
    """
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {arr.shape}")
    h, w = arr.shape[:2]
    if min(h, w) < MIN_IMAGE_PX:
        raise ImageTooSmall(f"image {w}x{h} below minimum {MIN_IMAGE_PX} px")
    rgb = arr.astype(np.float64)
    if arr.dtype == np.uint8:
        rgb = rgb / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    intensity = (r + g + b) / 3.0

    intensity_pyr = _gaussian_pyramid(intensity, config.pyramid_levels)
    rg, by = _opponency_channels(r, g, b, intensity)
    rg_pyr = _gaussian_pyramid(rg, config.pyramid_levels)
    by_pyr = _gaussian_pyramid(by, config.pyramid_levels)

    common = intensity_pyr[config.output_scale].shape

    def accumulate(feature_maps):
        # feature maps join the competition at the accumulation scale; the
        # broad inhibition kernel there costs a fraction of a native-scale
        # pass and the surviving peaks are the same
        total = np.zeros(common)
        for fmap in feature_maps:
            total += _iterative_normalize(_resize_to(fmap, common), config.norm_iterations)
        return total

    intensity_consp = accumulate(_center_surround(intensity_pyr, config))
    color_consp = accumulate(
        _center_surround(rg_pyr, config) + _center_surround(by_pyr, config)
    )

    orientation_consp = np.zeros(common)
    for orient_pyr in _orientation_pyramids(intensity_pyr, config):
        per_theta = accumulate(_center_surround(orient_pyr, config))
        orientation_consp += _iterative_normalize(per_theta, config.norm_iterations)

    return {
        "intensity": intensity_consp,
        "color": color_consp,
        "orientation": orientation_consp,
    }


def itti_koch_saliency(
    image: np.ndarray, config: IttiKochConfig = DEFAULT_CONFIG
) -> SaliencyMap:
    """Peak-normalized conspicuity map combining the intensity, color, and
    orientation channels of an RGB image."""
    channels = channel_conspicuities(image, config)
    combined = sum(
        _iterative_normalize(consp, config.norm_iterations)
        for consp in channels.values()
    ) / len(channels)
    h, w = np.asarray(image).shape[:2]
    full = np.clip(_resize_to(combined, (h, w)), 0.0, None)
    return SaliencyMap(full, "raw").normalized("max1")
