"""Dataset bias analyses: fixation location, color, saccade geometry, and
element visits/revisits.

All analyses consume image-normalized scanpaths. Per-image work is pure
and merges associatively, so callers may parallelize across images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

import numpy as np

from .core import (
    ELEMENT_CATEGORIES,
    ElementBox,
    Fixation,
    ImageMeta,
    StatTestResult,
    pixel_index,
)
from .errors import GroupTooSmall, KTooLarge, NoData, ZeroExpected
from .stats import bartlett, chi_square_gof, holm_bonferroni, kruskal_wallis

QUADRANT_LABELS = {1: "top-right", 2: "top-left", 3: "bottom-left", 4: "bottom-right"}

#: sRGB luma coefficients (Rec. 709 chromaticities), applied to
#: gamma-encoded channel values.
LUMA_COEFFS = (0.2126, 0.7152, 0.0722)

DIRECTIONS = ("right", "left", "down", "up")

REVISIT_MIN_FIXATIONS = 3


def quadrant_of(fix: Fixation) -> int:
    """Screen quadrant of a fixation: 1 top-right, 2 top-left, 3 bottom-left,
    4 bottom-right. The 0.5 boundary belongs to the right/bottom side."""
    if fix.y < 0.5:
        return 1 if fix.x >= 0.5 else 2
    return 4 if fix.x >= 0.5 else 3


@dataclass(frozen=True)
class QuadrantCounts:
    """Fixation counts per quadrant; reals allowed when averaged per user."""

    q1: float
    q2: float
    q3: float
    q4: float

    def as_list(self) -> list[float]:
        return [self.q1, self.q2, self.q3, self.q4]

    def total(self) -> float:
        return sum(self.as_list())


@dataclass(frozen=True)
class PairwiseQuadrantTest:
    pair: tuple[int, int]
    chi_square: StatTestResult | None
    chi_p_holm: float | None
    rank_sum: StatTestResult | None
    rank_p_holm: float | None


@dataclass(frozen=True, eq=False)
class LocationBiasResult:
    heat: np.ndarray
    quadrants_per_user: QuadrantCounts
    quadrants_per_user_image: QuadrantCounts
    totals: QuadrantCounts
    omnibus: StatTestResult
    pairwise: tuple[PairwiseQuadrantTest, ...]
    n_viewers: int
    n_fixations: int

    def __post_init__(self):
        heat = np.asarray(self.heat, dtype=np.float64).copy()
        heat.setflags(write=False)
        object.__setattr__(self, "heat", heat)


def _meta_lookup(metas) -> Mapping[str, ImageMeta]:
    if isinstance(metas, Mapping):
        return metas
    return {m.image_id: m for m in metas}


def location_bias(
    scanpaths,
    metas,
    horizon_s: float = math.inf,
    ui_type: str | None = None,
    grid_shape: tuple[int, int] = (64, 64),
) -> LocationBiasResult:
    """Aggregate normalized fixation positions and test the quadrant skew.

    The omnibus chi-square runs over per-user average counts; pairwise
    quadrant comparisons (chi-square and a rank-based variant over per-user
    counts) are Holm-corrected.
    """
    meta_by_id = _meta_lookup(metas)
    heat = np.zeros(grid_shape, dtype=np.float64)
    per_user: dict[str, np.ndarray] = {}
    pairs = set()
    n_fixations = 0
    for sp in scanpaths:
        meta = meta_by_id.get(sp.image_id)
        if meta is None or (ui_type is not None and meta.ui_type != ui_type):
            continue
        counts = per_user.setdefault(sp.viewer_id, np.zeros(4))
        for f in sp.fixations:
            if f.onset_s >= horizon_s or not f.in_bounds:
                continue
            counts[quadrant_of(f) - 1] += 1
            heat[pixel_index(f.y, grid_shape[0]), pixel_index(f.x, grid_shape[1])] += 1
            n_fixations += 1
        pairs.add((sp.viewer_id, sp.image_id))
    if n_fixations == 0:
        raise NoData("no in-bounds fixations matched the filters")

    totals = np.sum(list(per_user.values()), axis=0)
    n_viewers = len(per_user)
    avg_user = totals / n_viewers
    avg_user_image = totals / len(pairs)
    omnibus = chi_square_gof(avg_user)

    quadrant_pairs = list(combinations(range(4), 2))
    chi_results, chi_ps = [], []
    rank_results, rank_ps = [], []
    for i, j in quadrant_pairs:
        try:
            chi = chi_square_gof([avg_user[i], avg_user[j]])
        except (ZeroExpected, GroupTooSmall):
            chi = None
        chi_results.append(chi)
        chi_ps.append(chi.p_value if chi else None)
        group_i = [c[i] for c in per_user.values()]
        group_j = [c[j] for c in per_user.values()]
        try:
            rank = kruskal_wallis([group_i, group_j])
        except (GroupTooSmall, ValueError):
            rank = None
        rank_results.append(rank)
        rank_ps.append(rank.p_value if rank else None)

    def _holm_sparse(ps):
        present = [p for p in ps if p is not None]
        adjusted = iter(holm_bonferroni(present)) if present else iter(())
        return [next(adjusted) if p is not None else None for p in ps]

    chi_holm = _holm_sparse(chi_ps)
    rank_holm = _holm_sparse(rank_ps)
    pairwise = tuple(
        PairwiseQuadrantTest(
            pair=(i + 1, j + 1),
            chi_square=chi_results[n],
            chi_p_holm=chi_holm[n],
            rank_sum=rank_results[n],
            rank_p_holm=rank_holm[n],
        )
        for n, (i, j) in enumerate(quadrant_pairs)
    )
    return LocationBiasResult(
        heat=heat,
        quadrants_per_user=QuadrantCounts(*avg_user),
        quadrants_per_user_image=QuadrantCounts(*avg_user_image),
        totals=QuadrantCounts(*totals),
        omnibus=omnibus,
        pairwise=pairwise,
        n_viewers=n_viewers,
        n_fixations=n_fixations,
    )


# --- color ------------------------------------------------------------------


@dataclass(frozen=True)
class ColorCluster:
    centroid: tuple[float, float, float]
    pixel_share: float
    fixation_counts: tuple[tuple[float, int], ...] = ()

    def fixation_count(self, horizon_s: float) -> int:
        for h, count in self.fixation_counts:
            if h == horizon_s:
                return count
        return 0


@dataclass(frozen=True)
class ColorPalette:
    clusters: tuple[ColorCluster, ...]

    def __len__(self) -> int:
        return len(self.clusters)

    def centroids(self) -> np.ndarray:
        return np.array([c.centroid for c in self.clusters], dtype=np.float64)


def _image_arrays(images):
    if isinstance(images, Mapping):
        return list(images.values())
    return list(images)


def _subsample_pixels(image: np.ndarray, rng, max_pixels: int) -> np.ndarray:
    pixels = np.asarray(image).reshape(-1, 3).astype(np.float64)
    if len(pixels) > max_pixels:
        # with-replacement draw: O(sample) instead of a full-population
        # permutation, and duplicates are negligible at these rates
        idx = rng.randint(0, len(pixels), size=max_pixels)
        pixels = pixels[np.sort(idx)]
    return pixels


def _sq_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # chunked so the n x k matrix never dominates memory on large pools
    out = np.empty((len(points), len(centers)))
    step = 1 << 17
    for start in range(0, len(points), step):
        block = points[start : start + step]
        for j, c in enumerate(centers):
            out[start : start + step, j] = ((block - c) ** 2).sum(axis=1)
    return out


def _kmeans(points: np.ndarray, k: int, rng, max_iter: int, tol: float):
    """Lloyd iterations with k-means++ seeding; deterministic given rng."""
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.randint(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            centers[i] = points[rng.choice(n, p=d2 / total)]
        else:
            centers[i] = points[rng.randint(n)]
        d2 = np.minimum(d2, ((points - centers[i]) ** 2).sum(axis=1))
    prev_inertia = None
    labels = np.zeros(n, dtype=np.intp)
    for _ in range(max_iter):
        dists = _sq_distances(points, centers)
        labels = dists.argmin(axis=1)
        inertia = float(dists[np.arange(n), labels].sum())
        for j in range(k):
            members = points[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                centers[j] = points[dists.min(axis=1).argmax()]
        if prev_inertia is not None and prev_inertia > 0:
            if abs(prev_inertia - inertia) / prev_inertia < tol:
                break
        prev_inertia = inertia
    labels = _sq_distances(points, centers).argmin(axis=1)
    return centers, labels


def color_palette(
    images,
    k: int = 16,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-4,
    max_pixels_per_image: int = 100_000,
    max_total_pixels: int = 500_000,
) -> ColorPalette:
    """The k most prevalent colors across the images, by k-means clustering
    of subsampled RGB pixels. Clusters are ordered by pixel share."""
    rng = np.random.RandomState(seed)
    pools = [
        _subsample_pixels(img, rng, max_pixels_per_image)
        for img in _image_arrays(images)
    ]
    if not pools:
        raise NoData("no images given")
    pixels = np.concatenate(pools, axis=0)
    if len(pixels) > max_total_pixels:
        idx = rng.choice(len(pixels), size=max_total_pixels, replace=False)
        pixels = pixels[np.sort(idx)]
    distinct = np.unique(pixels, axis=0)
    if len(distinct) < k:
        raise KTooLarge(f"only {len(distinct)} distinct colors for k = {k}")
    centers, labels = _kmeans(pixels, k, rng, max_iter, tol)
    shares = np.bincount(labels, minlength=k) / len(pixels)
    order = sorted(range(k), key=lambda j: (-shares[j], tuple(centers[j])))
    clusters = tuple(
        ColorCluster(centroid=tuple(centers[j]), pixel_share=float(shares[j]))
        for j in order
    )
    return ColorPalette(clusters=clusters)


def fixated_color_ranking(
    palette: ColorPalette, images: Mapping[str, np.ndarray], scanpaths, horizon_s: float
) -> ColorPalette:
    """Reorder palette clusters by the number of fixations landing on each
    cluster's colors within the horizon.

    Every fixation votes for the cluster nearest its pixel color. With no
    votes the pixel-share order is kept.
    """
    centroids = palette.centroids()
    votes = np.zeros(len(palette), dtype=np.int64)
    for sp in scanpaths:
        image = images.get(sp.image_id)
        if image is None:
            continue
        arr = np.asarray(image)
        h, w = arr.shape[:2]
        for f in sp.fixations:
            if f.onset_s >= horizon_s or not f.in_bounds:
                continue
            color = arr[pixel_index(f.y, h), pixel_index(f.x, w)].astype(np.float64)
            votes[((centroids - color) ** 2).sum(axis=1).argmin()] += 1
    order = sorted(range(len(palette)), key=lambda j: -votes[j])
    clusters = []
    for j in order:
        old = palette.clusters[j]
        counts = tuple(
            (h, c) for h, c in old.fixation_counts if h != horizon_s
        ) + ((horizon_s, int(votes[j])),)
        clusters.append(
            ColorCluster(
                centroid=old.centroid,
                pixel_share=old.pixel_share,
                fixation_counts=counts,
            )
        )
    return ColorPalette(clusters=tuple(clusters))


def luma(rgb) -> float:
    """Perceived brightness of an 8-bit RGB triple in [0, 1], from the
    Rec. 709 luma coefficients on gamma-encoded values."""
    r, g, b = rgb
    cr, cg, cb = LUMA_COEFFS
    return (cr * r + cg * g + cb * b) / 255.0


def _luma_array(pixels: np.ndarray) -> np.ndarray:
    return pixels.astype(np.float64) @ np.array(LUMA_COEFFS) / 255.0


@dataclass(frozen=True)
class BoxSummary:
    """Box-plot summary of one sample group."""

    count: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "BoxSummary":
        return cls(
            count=len(samples),
            minimum=float(samples.min()),
            q1=float(np.percentile(samples, 25)),
            median=float(np.percentile(samples, 50)),
            q3=float(np.percentile(samples, 75)),
            maximum=float(samples.max()),
            mean=float(samples.mean()),
        )


@dataclass(frozen=True, eq=False)
class BrightnessBiasResult:
    group_labels: tuple[str, ...]
    summaries: tuple[BoxSummary, ...]
    samples: tuple[np.ndarray, ...]
    bartlett: StatTestResult

    def __post_init__(self):
        frozen = []
        for group in self.samples:
            arr = np.asarray(group, dtype=np.float64).copy()
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "samples", tuple(frozen))


def brightness_bias(
    images: Mapping[str, np.ndarray],
    scanpaths,
    horizons=(1.0, 3.0, 7.0),
    max_pixels_per_image: int = 100_000,
    max_total_pixels: int = 2_000_000,
    seed: int = 0,
) -> BrightnessBiasResult:
    """Compare brightness of all displayed pixels against pixels fixated
    within each horizon; homogeneity of variances via Bartlett's test.

    Each fixation samples the single pixel at its rounded center. The
    all-pixels group is subsampled per image and capped overall so the
    analysis stays in memory on large corpora.
    """
    rng = np.random.RandomState(seed)
    all_lumas = [
        _luma_array(_subsample_pixels(img, rng, max_pixels_per_image))
        for img in images.values()
    ]
    if not all_lumas:
        raise NoData("no images given")
    pooled = np.concatenate(all_lumas)
    if len(pooled) > max_total_pixels:
        idx = rng.choice(len(pooled), size=max_total_pixels, replace=False)
        pooled = pooled[np.sort(idx)]
    groups = [pooled]
    labels = ["all_pixels"]
    # luma at every in-bounds fixation pixel, gathered once; horizons then
    # slice by onset
    fixated: list[tuple[np.ndarray, np.ndarray]] = []
    for sp in scanpaths:
        image = images.get(sp.image_id)
        if image is None or not sp.fixations:
            continue
        arr = np.asarray(image)
        h, w = arr.shape[:2]
        pts = sp.points()
        onsets = np.array([f.onset_s for f in sp.fixations])
        in_bounds = (
            (pts[:, 0] >= 0) & (pts[:, 0] <= 1) & (pts[:, 1] >= 0) & (pts[:, 1] <= 1)
        )
        if not in_bounds.any():
            continue
        cols = np.minimum((pts[in_bounds, 0] * w).astype(np.intp), w - 1)
        rows = np.minimum((pts[in_bounds, 1] * h).astype(np.intp), h - 1)
        fixated.append((onsets[in_bounds], _luma_array(arr[rows, cols])))
    for horizon in horizons:
        lumas = [lum[onsets < horizon] for onsets, lum in fixated]
        groups.append(
            np.concatenate(lumas) if lumas else np.empty(0, dtype=np.float64)
        )
        labels.append(f"fixated_{horizon:g}s")
    if any(len(g) < 2 for g in groups):
        raise NoData("each brightness group needs at least two samples")
    test = bartlett(groups)
    return BrightnessBiasResult(
        group_labels=tuple(labels),
        summaries=tuple(BoxSummary.from_samples(g) for g in groups),
        samples=tuple(groups),
        bartlett=test,
    )


# --- saccades ----------------------------------------------------------------


@dataclass(frozen=True)
class PolarHistogram:
    """Saccade angle/amplitude distribution: per-bin amplitude samples plus
    four-way cardinal direction counts and a rank test over per-direction
    amplitudes."""

    bin_edges_deg: tuple[float, ...]
    bin_amplitudes: tuple[tuple[float, ...], ...]
    direction_counts: tuple[tuple[str, int], ...]
    direction_amplitudes: tuple[tuple[str, tuple[float, ...]], ...]
    kruskal: StatTestResult | None

    @property
    def counts_by_direction(self) -> dict[str, int]:
        return dict(self.direction_counts)

    @property
    def n_saccades(self) -> int:
        return sum(count for _, count in self.direction_counts)


def cardinal_direction(angle_deg: float) -> str:
    """Nearest cardinal direction in screen coordinates (y down, so 90 deg
    points down). Sector boundaries at odd multiples of 45 deg break toward
    the horizontal directions."""
    if -45.0 <= angle_deg <= 45.0:
        return "right"
    if 45.0 < angle_deg < 135.0:
        return "down"
    if -135.0 < angle_deg < -45.0:
        return "up"
    return "left"


def saccade_distribution(scanpaths, n_bins: int = 36) -> PolarHistogram:
    """Angles and amplitudes of consecutive-fixation saccades.

    Angles use atan2(dy, dx) in screen coordinates; amplitude is Euclidean
    distance in normalized units.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    edges = np.linspace(-180.0, 180.0, n_bins + 1)
    bin_amps: list[list[float]] = [[] for _ in range(n_bins)]
    dir_amps: dict[str, list[float]] = {d: [] for d in DIRECTIONS}
    for sp in scanpaths:
        pts = sp.points()
        for i in range(1, len(pts)):
            dx = pts[i, 0] - pts[i - 1, 0]
            dy = pts[i, 1] - pts[i - 1, 1]
            angle = math.degrees(math.atan2(dy, dx))
            amplitude = math.sqrt(dx * dx + dy * dy)
            idx = min(int((angle + 180.0) / 360.0 * n_bins), n_bins - 1)
            bin_amps[idx].append(amplitude)
            dir_amps[cardinal_direction(angle)].append(amplitude)
    populated = [amps for amps in dir_amps.values() if len(amps) > 0]
    kruskal = None
    if len(populated) >= 2:
        try:
            kruskal = kruskal_wallis(populated)
        except (GroupTooSmall, ValueError):
            kruskal = None
    return PolarHistogram(
        bin_edges_deg=tuple(edges),
        bin_amplitudes=tuple(tuple(a) for a in bin_amps),
        direction_counts=tuple((d, len(dir_amps[d])) for d in DIRECTIONS),
        direction_amplitudes=tuple((d, tuple(dir_amps[d])) for d in DIRECTIONS),
        kruskal=kruskal,
    )


# --- visits ------------------------------------------------------------------


@dataclass(frozen=True)
class CategoryVisitStats:
    element_count: int
    visited_count: int
    revisited_count: int
    visit_ratio: float
    revisit_ratio: float


@dataclass(frozen=True)
class VisitStats:
    per_category: tuple[tuple[str, CategoryVisitStats], ...]

    def category(self, name: str) -> CategoryVisitStats:
        for cat, stats in self.per_category:
            if cat == name:
                return stats
        raise KeyError(name)


def _element_of(fix: Fixation, boxes: list[ElementBox], width: int, height: int):
    """Index of the smallest-area box containing the fixation, or None.

    Ties go to the earliest box in the list; fixations outside every box
    are ignored by the visit analysis.
    """
    px, py = fix.x * width, fix.y * height
    best = None
    best_area = math.inf
    for i, box in enumerate(boxes):
        if box.contains(px, py) and box.area < best_area:
            best = i
            best_area = box.area
    return best


def visit_revisit(scanpaths, boxes, meta: ImageMeta) -> VisitStats:
    """Visited and revisited element counts per category.

    An element is visited when at least one fixation lands inside it, and
    revisited when it accumulates at least three fixations of which one
    immediately follows (within the same scanpath) a fixation on a
    different element. Fixations outside every box are dropped from the
    sequence first.
    """
    boxes = list(boxes)
    fix_counts = np.zeros(len(boxes), dtype=np.int64)
    has_other_predecessor = np.zeros(len(boxes), dtype=bool)
    for sp in scanpaths:
        seq = [
            elem
            for elem in (
                _element_of(f, boxes, meta.width, meta.height) for f in sp.fixations
            )
            if elem is not None
        ]
        for pos, elem in enumerate(seq):
            fix_counts[elem] += 1
            if pos > 0 and seq[pos - 1] != elem:
                has_other_predecessor[elem] = True
    per_category = []
    for cat in ELEMENT_CATEGORIES:
        members = [i for i, b in enumerate(boxes) if b.category == cat]
        visited = sum(1 for i in members if fix_counts[i] >= 1)
        revisited = sum(
            1
            for i in members
            if fix_counts[i] >= REVISIT_MIN_FIXATIONS and has_other_predecessor[i]
        )
        total = len(members)
        per_category.append(
            (
                cat,
                CategoryVisitStats(
                    element_count=total,
                    visited_count=visited,
                    revisited_count=revisited,
                    visit_ratio=visited / total if total else 0.0,
                    revisit_ratio=revisited / total if total else 0.0,
                ),
            )
        )
    return VisitStats(per_category=tuple(per_category))
