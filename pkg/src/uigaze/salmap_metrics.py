"""Saliency map evaluation metrics.

Location-based metrics (AUC-Judd, NSS, information gain) score a predicted
map against a set of fixated pixels; distribution-based metrics
(similarity, Pearson correlation, KL divergence) compare two maps.
Maps may be passed as SaliencyMap instances or plain 2-D arrays.
"""

from __future__ import annotations

import math

import numpy as np

from .core import SaliencyMap
from .errors import DimensionMismatch, EmptyFixations, ZeroVariance

DEFAULT_EPS = 1e-9


def _as_values(m) -> np.ndarray:
    arr = m.values if isinstance(m, SaliencyMap) else np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
    return arr


def _check_same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionMismatch(f"map shapes differ: {a.shape} vs {b.shape}")


def _sum1(arr: np.ndarray) -> np.ndarray:
    """Renormalize to a distribution; an all-zero map is left as zeros."""
    total = arr.sum()
    return arr / total if total > 0 else arr


def _fixation_mask(points, shape) -> np.ndarray:
    """Boolean mask from (x, y) pixel coordinates; duplicates collapse."""
    pts = list(points)
    if not pts:
        raise EmptyFixations("no fixation points given")
    mask = np.zeros(shape, dtype=bool)
    h, w = shape
    for x, y in pts:
        xi, yi = int(x), int(y)
        if not (0 <= xi < w and 0 <= yi < h):
            raise ValueError(f"fixation point ({x}, {y}) outside {w}x{h} map")
        mask[yi, xi] = True
    return mask


def auc_judd(pred, fixations) -> float:
    """Area under the ROC curve with thresholds swept over the predicted
    values at fixated pixels.

    True positive rate: fraction of fixation pixels at or above threshold.
    False positive rate: fraction of non-fixation pixels at or above
    threshold. Trapezoidal area with (0, 0) and (1, 1) included.
    """
    values = _as_values(pred)
    mask = _fixation_mask(fixations, values.shape)
    fix_vals = values[mask]
    non_fix_vals = values[~mask]
    if non_fix_vals.size == 0:
        raise ValueError("every pixel is a fixation; FP rate undefined")
    thresholds = np.unique(fix_vals)[::-1]  # descending: rates grow monotonically
    tp = [0.0]
    fp = [0.0]
    for t in thresholds:
        tp.append(float((fix_vals >= t).mean()))
        fp.append(float((non_fix_vals >= t).mean()))
    tp.append(1.0)
    fp.append(1.0)
    tp_arr = np.asarray(tp)
    fp_arr = np.asarray(fp)
    return float(np.sum(np.diff(fp_arr) * (tp_arr[1:] + tp_arr[:-1])) / 2.0)


def nss(pred, fixations) -> float:
    """Average saliency at fixated pixels after z-scoring the whole map
    (population standard deviation)."""
    values = _as_values(pred)
    mask = _fixation_mask(fixations, values.shape)
    std = float(values.std())
    if std == 0.0:
        raise ZeroVariance("saliency map is constant")
    z = (values - values.mean()) / std
    return float(z[mask].mean())


def info_gain(pred, baseline, fixations, eps: float = DEFAULT_EPS) -> float:
    """Information gain of pred over a baseline map at fixated pixels, in
    bits. Both maps are renormalized to distributions first."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _as_values(pred)
    b = _as_values(baseline)
    _check_same_shape(p, b)
    mask = _fixation_mask(fixations, p.shape)
    p = _sum1(p)
    b = _sum1(b)
    gain = np.log2(p[mask] + eps) - np.log2(b[mask] + eps)
    return float(gain.mean())


def sim(pred, gt) -> float:
    """Histogram intersection of the two maps as distributions, in [0, 1]."""
    p = _sum1(_as_values(pred))
    g = _sum1(_as_values(gt))
    _check_same_shape(p, g)
    return float(np.minimum(p, g).sum())


def cc(pred, gt) -> float:
    """Pearson correlation coefficient over all pixels."""
    p_map = _as_values(pred)
    g_map = _as_values(gt)
    _check_same_shape(p_map, g_map)
    p = p_map.ravel()
    g = g_map.ravel()
    p_std = float(p.std())
    g_std = float(g.std())
    if p_std == 0.0 or g_std == 0.0:
        raise ZeroVariance("correlation undefined for a constant map")
    cov = float(((p - p.mean()) * (g - g.mean())).mean())
    return cov / (p_std * g_std)


def kl_div(pred, gt, eps: float = DEFAULT_EPS, base: float = math.e) -> float:
    """KL divergence of the ground truth from the prediction,
    sum of gt * log(gt / (pred + eps)) with 0 log 0 = 0.

    Both maps are renormalized to distributions; the result is clamped at
    zero so identical maps score exactly 0 despite the eps guard.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _sum1(_as_values(pred))
    g = _sum1(_as_values(gt))
    _check_same_shape(p, g)
    support = g > 0
    total = float(np.sum(g[support] * np.log(g[support] / (p[support] + eps))))
    total /= math.log(base)
    return max(0.0, total)


def uniform_map(width: int, height: int) -> SaliencyMap:
    """Uniform baseline distribution over a width x height grid."""
    values = np.full((height, width), 1.0 / (width * height))
    return SaliencyMap(values, "sum1")


def mean_map(maps) -> SaliencyMap:
    """Mean of several maps as distributions (each sum1-normalized first);
    used as a center/type bias baseline for information gain."""
    stack = [_sum1(_as_values(m)) for m in maps]
    if not stack:
        raise ValueError("need at least one map")
    first = stack[0]
    for other in stack[1:]:
        _check_same_shape(first, other)
    mean = np.mean(stack, axis=0)
    return SaliencyMap(_sum1(mean), "sum1")
