"""Gaze analytics toolkit for UI screenshots.

Ingests eye-tracker fixation logs, builds duration-weighted saliency maps,
evaluates scanpaths and saliency maps, runs fixation bias analyses, and
generates baseline scanpaths from conspicuity maps with inhibition of
return.
"""

from .core import (
    ELEMENT_CATEGORIES,
    NORM_MODES,
    UI_TYPES,
    ElementBox,
    Fixation,
    ImageMeta,
    SaliencyMap,
    Scanpath,
    StatTestResult,
    pixel_center,
    pixel_index,
)
from .errors import GazeToolkitError
from .ingest import (
    ColumnMapping,
    apply_letterbox,
    filter_in_bounds,
    parse_fixation_log,
    parse_image_manifest,
    parse_segmentation,
    read_canonical,
    truncate_to_duration,
    write_canonical,
)
from .salmap import (
    GaussianKernelSpec,
    binary_fixation_points,
    default_sigma_px,
    fixation_map,
    read_grid,
    read_png_map,
    write_grid,
    write_png16,
)
from .ittikoch import IttiKochConfig, channel_conspicuities, itti_koch_saliency
from .scanpath_metrics import (
    RecurrenceMatrix,
    corm,
    det,
    dtw,
    eyenalysis,
    rec,
    recurrence_matrix,
    tde,
)
from .salmap_metrics import (
    auc_judd,
    cc,
    info_gain,
    kl_div,
    mean_map,
    nss,
    sim,
    uniform_map,
)
from .stats import (
    bartlett,
    chi2_sf,
    chi_square_gof,
    holm_bonferroni,
    kruskal_wallis,
    phi_effect_size,
)
from .bias import (
    ColorPalette,
    LocationBiasResult,
    PolarHistogram,
    QuadrantCounts,
    VisitStats,
    brightness_bias,
    cardinal_direction,
    color_palette,
    fixated_color_ranking,
    location_bias,
    luma,
    quadrant_of,
    saccade_distribution,
    visit_revisit,
)
from .generate import IorSpec, argmax_with_ties, wta_ior_scanpath

__version__ = "0.1.0"
