"""Dual-branch alpha fusion guided by evaluation maps.

Given video-branch and image-branch mattes plus their binary evaluation
maps, build a soft fusion mask selecting pixels where the image branch is
reliable and the video branch is not, blur it, and blend the mattes. The
fused frame also carries the union of the two evaluation maps for
downstream filtering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import defaults
from ._sepconv import correlate2d_separable, gaussian_kernel
from .core import AlphaMatte, EvalMap, as_alpha, as_binary
from .errors import DimensionMismatch

_BORDER = "symmetric"


def gaussian_blur(
    img,
    kernel_size: int = defaults.BLUR_KERNEL,
    sigma: float = defaults.BLUR_SIGMA,
) -> np.ndarray:
    """Separable Gaussian blur with an explicitly sized kernel.

    The 1-D kernel has `kernel_size` taps (must be odd) sampled from a
    Gaussian with the given sigma and normalized to unit sum (within one
    float ulp), so a constant image stays constant to round-off. Borders
    replicate edge pixels symmetrically.
    """
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValueError(f"kernel_size must be odd and positive, got {kernel_size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(img, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected 2-D image, got shape {x.shape}")
    k = gaussian_kernel(sigma, radius=kernel_size // 2, normalize=True)
    return correlate2d_separable(x, k, k, mode=_BORDER)


def fusion_mask(eval_i, eval_v) -> np.ndarray:
    """Soft mask in [0, 1]: high where the image branch is reliable and the
    video branch is not, then Gaussian-blurred (9x9, sigma 5) to avoid
    seams. Values clipped to [0, 1] to absorb float round-off."""
    ei = as_binary(eval_i, "eval_i")
    ev = as_binary(eval_v, "eval_v")
    if ei.shape != ev.shape:
        raise DimensionMismatch(f"eval_i {ei.shape} vs eval_v {ev.shape}")
    hard = ei.astype(np.float64) * (1.0 - ev.astype(np.float64))
    return np.clip(gaussian_blur(hard), 0.0, 1.0)


def blend(alpha_v, alpha_i, mask) -> AlphaMatte:
    """Per-pixel convex blend alpha_v + mask * (alpha_i - alpha_v).

    Written in this form so mask == 0 reproduces alpha_v bitwise and
    mask == 1 reproduces alpha_i bitwise, and intermediate values cannot
    leave [min(alphas), max(alphas)] per pixel.
    """
    av = as_alpha(alpha_v, "alpha_v")
    ai = as_alpha(alpha_i, "alpha_i")
    m = np.asarray(mask, dtype=np.float64)
    if av.shape != ai.shape or av.shape != m.shape:
        raise DimensionMismatch(f"alpha_v {av.shape}, alpha_i {ai.shape}, mask {m.shape}")
    if m.min() < 0.0 or m.max() > 1.0:
        raise ValueError("fusion mask must lie in [0, 1]")
    return as_alpha(av + m * (ai - av))


def union_eval(eval_v, eval_i) -> EvalMap:
    """Pixel is reliable in the fused frame if either branch is reliable."""
    ev = as_binary(eval_v, "eval_v")
    ei = as_binary(eval_i, "eval_i")
    if ev.shape != ei.shape:
        raise DimensionMismatch(f"eval_v {ev.shape} vs eval_i {ei.shape}")
    return as_binary((ev | ei).astype(np.uint8))


@dataclass(frozen=True)
class FusionResult:
    alpha: AlphaMatte
    eval_map: EvalMap
    mask: np.ndarray
    image_fraction: float  # fraction of pixels where the blurred mask > 0.5
    mask_mean: float


def fuse_frame(
    alpha_v,
    alpha_i,
    eval_v,
    eval_i,
    kernel_size: int = defaults.BLUR_KERNEL,
    sigma: float = defaults.BLUR_SIGMA,
) -> FusionResult:
    """Full fusion step for one frame."""
    ei = as_binary(eval_i, "eval_i")
    ev = as_binary(eval_v, "eval_v")
    if ei.shape != ev.shape:
        raise DimensionMismatch(f"eval_i {ei.shape} vs eval_v {ev.shape}")
    hard = ei.astype(np.float64) * (1.0 - ev.astype(np.float64))
    mask = np.clip(gaussian_blur(hard, kernel_size, sigma), 0.0, 1.0)
    fused = blend(alpha_v, alpha_i, mask)
    merged = union_eval(ev, ei)
    return FusionResult(
        alpha=fused,
        eval_map=merged,
        mask=mask,
        image_fraction=float(np.count_nonzero(mask > 0.5)) / mask.size,
        mask_mean=float(mask.mean()),
    )
