"""Matte-quality evaluation and data-curation toolkit.

Core pieces: reference metrics for alpha mattes (MAD/MSE/Grad/Conn/dtSSD),
patch-level pseudo ground truth and binary evaluation maps, dual-branch
matte fusion guided by those maps, analytic training losses with exact
gradients, deterministic window/reference sampling with patch dropout,
mask-set curation, and evaluator-vs-truth correlation analysis. A manifest
driven CLI (`matteval`) ties the pieces into batch pipelines.
"""

__version__ = "0.1.0"

from .analysis import BinnedCorrelation, BinRecord, bin_and_correlate, collect_pairs, write_plot_csv
from .core import (
    as_alpha,
    as_binary,
    as_prob,
    as_rgb,
    binarize_prob,
    from_quantized,
    quantize,
    validate_pair,
)
from .curation import (
    Box,
    DualBranchConfig,
    MaskEntry,
    MaskSet,
    coverage_ratio,
    group_to_instances,
    load_instance_boxes,
    remove_redundant,
    run_dual_branch,
)
from .errors import (
    ConfigError,
    CorruptHeader,
    DimensionMismatch,
    DimensionOverflow,
    DuplicateFrameId,
    EmptyRegion,
    GridError,
    LengthMismatch,
    MattevalError,
    RangeViolation,
    SchemaViolation,
    SequenceTooShort,
    TooManyReferences,
    UnsupportedFormat,
)
from .evalmap import (
    DirectoryEvaluator,
    EvaluatorPlugin,
    FrameBundle,
    ManifestProbEvaluator,
    NonRefReport,
    OracleEvaluator,
    PatchGrid,
    boundary_band,
    broadcast_cells,
    make_evaluator,
    make_patch_grid,
    nonref_metrics,
    normalize_minmax,
    oracle_prob_map,
    patch_discrepancy,
    pseudo_gt_map,
)
from .fusion import FusionResult, blend, fuse_frame, fusion_mask, gaussian_blur, union_eval
from .imgio import (
    load_alpha,
    load_evalmap,
    load_pfm,
    load_prob,
    load_rgb,
    load_segmask,
    save_alpha,
    save_evalmap,
    save_pfm,
    save_prob,
    save_rgb,
    save_segmask,
)
from .losses import (
    LossFrame,
    LossValue,
    dice_loss,
    eval_guidance_loss,
    focal_loss,
    laplacian_pyramid,
    masked_l1,
    masked_laplacian_loss,
    masked_tc_loss,
    matting_total_loss,
    max_pyramid_levels,
    mqe_total_loss,
    reconstruct_pyramid,
)
from .manifest import FrameRecord, SequenceManifest, load_manifest
from .metrics import (
    MetricReport,
    conn_metric,
    dtssd,
    gaussian_gradient_magnitude,
    grad_metric,
    mad,
    mse,
    sequence_report,
)
from .report import build_report, load_report, recompute_aggregates, validate_report, write_report
from .sampler import (
    AppliedPatch,
    DropoutSpec,
    WindowPlan,
    boundary_from_alpha,
    dropout_augment,
    make_rng,
    plan_window,
)

__all__ = [name for name in dir() if not name.startswith("_")]
