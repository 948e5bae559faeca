"""Reference-based matting metrics: MAD, MSE, Grad, Conn, dtSSD.

Scaling conventions: MAD/MSE/Grad/Conn are means multiplied by 1000, dtSSD
is a per-step RMS difference multiplied by 100. Convolutions use symmetric
reflect borders; component labeling is 4-connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from . import defaults
from ._sepconv import correlate1d, gaussian_deriv_kernel, gaussian_kernel
from .core import AlphaMatte, as_alpha, as_binary
from .errors import DimensionMismatch, EmptyRegion, LengthMismatch, SequenceTooShort

_BORDER = "symmetric"


@dataclass(frozen=True)
class MetricReport:
    """Sequence-level metric summary; dtssd is None for single frames."""

    mad: float
    mse: float
    grad: float
    conn: float
    dtssd: Optional[float]
    frame_count: int


def _check_pair(pred, gt, region=None):
    p = as_alpha(pred, "pred")
    g = as_alpha(gt, "gt")
    if p.shape != g.shape:
        raise DimensionMismatch(f"pred {p.shape} vs gt {g.shape}")
    r = None
    if region is not None:
        r = as_binary(region, "region")
        if r.shape != p.shape:
            raise DimensionMismatch(f"region {r.shape} vs pred {p.shape}")
        if not r.any():
            raise EmptyRegion("region contains no pixels")
    return p, g, r


def _region_mean(values: np.ndarray, region) -> float:
    if region is None:
        return float(np.mean(values))
    sel = region.astype(bool)
    return float(np.mean(values[sel]))


def mad(pred, gt, region=None) -> float:
    """Mean absolute difference x 1000, optionally restricted to a region."""
    p, g, r = _check_pair(pred, gt, region)
    return _region_mean(np.abs(p - g), r) * defaults.METRIC_SCALE


def mse(pred, gt, region=None) -> float:
    """Mean squared difference x 1000, optionally restricted to a region."""
    p, g, r = _check_pair(pred, gt, region)
    return _region_mean((p - g) ** 2, r) * defaults.METRIC_SCALE


def gaussian_gradient_magnitude(img, sigma: float = defaults.GRAD_SIGMA) -> np.ndarray:
    """Per-pixel magnitude of the Gaussian-derivative gradient.

    Kernels are sampled analytically at scale sigma, truncated at radius
    ceil(3 * sigma), applied separably with symmetric reflect borders.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = as_alpha(img, "img")
    radius = math.ceil(3.0 * sigma)
    deriv = gaussian_deriv_kernel(sigma, radius)
    smooth = gaussian_kernel(sigma, radius, normalize=False)
    gx = correlate1d(correlate1d(x, deriv, axis=1, mode=_BORDER), smooth, axis=0, mode=_BORDER)
    gy = correlate1d(correlate1d(x, deriv, axis=0, mode=_BORDER), smooth, axis=1, mode=_BORDER)
    return np.sqrt(gx**2 + gy**2)


def grad_metric(pred, gt, sigma: float = defaults.GRAD_SIGMA) -> float:
    """Mean squared difference of gradient magnitudes x 1000."""
    p, g, _ = _check_pair(pred, gt)
    gp = gaussian_gradient_magnitude(p, sigma)
    gg = gaussian_gradient_magnitude(g, sigma)
    return float(np.mean((gp - gg) ** 2)) * defaults.METRIC_SCALE


def _largest_component(mask: np.ndarray) -> np.ndarray:
    # scipy.ndimage.label numbers components in raster order of first
    # encounter, so argmax of the size histogram breaks ties toward the
    # component whose first pixel comes earliest.
    labels, count = ndimage.label(mask)
    if count == 0:
        return np.zeros_like(mask, dtype=bool)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return labels == int(np.argmax(sizes))


def conn_metric(
    pred,
    gt,
    step: float = defaults.CONN_STEP,
    tolerance: float = defaults.CONN_TOLERANCE,
) -> float:
    """Connectivity metric over thresholds {step, 2*step, ..., 1.0}, x 1000.

    For each threshold the largest 4-connected component of
    {pred >= t} & {gt >= t} is found; each pixel records the largest
    threshold at which it belonged (0 if never). The source-to-component
    distances are mapped through phi(d) = 1 - d * [d >= tolerance] and the
    mean absolute phi difference is reported.
    """
    p, g, _ = _check_pair(pred, gt)
    n_steps = int(round(1.0 / step))
    l_map = np.zeros_like(p)
    for k in range(1, n_steps + 1):
        t = k / n_steps
        joint = (p >= t) & (g >= t)
        if not joint.any():
            continue
        omega = _largest_component(joint)
        l_map[omega] = t
    d_pred = p - l_map
    d_gt = g - l_map
    phi_pred = 1.0 - d_pred * (d_pred >= tolerance)
    phi_gt = 1.0 - d_gt * (d_gt >= tolerance)
    return float(np.mean(np.abs(phi_pred - phi_gt))) * defaults.METRIC_SCALE


def dtssd(pred_seq: Sequence[AlphaMatte], gt_seq: Sequence[AlphaMatte], region=None) -> float:
    """Temporal coherence: mean over steps of the RMS difference between
    consecutive-frame changes of pred and gt, x 100."""
    if len(pred_seq) != len(gt_seq):
        raise LengthMismatch(f"{len(pred_seq)} pred frames vs {len(gt_seq)} gt frames")
    if len(pred_seq) < 2:
        raise SequenceTooShort("dtSSD needs at least 2 frames")
    preds = [as_alpha(f, f"pred[{i}]") for i, f in enumerate(pred_seq)]
    gts = [as_alpha(f, f"gt[{i}]") for i, f in enumerate(gt_seq)]
    for i, (p, g) in enumerate(zip(preds, gts)):
        if p.shape != preds[0].shape or g.shape != preds[0].shape:
            raise DimensionMismatch(f"frame {i} shape differs")
    r = None
    if region is not None:
        r = as_binary(region, "region")
        if r.shape != preds[0].shape:
            raise DimensionMismatch("region shape differs from frames")
        if not r.any():
            raise EmptyRegion("region contains no pixels")
    total = 0.0
    for t in range(1, len(preds)):
        dp = preds[t] - preds[t - 1]
        dg = gts[t] - gts[t - 1]
        total += math.sqrt(_region_mean((dp - dg) ** 2, r))
    return total / (len(preds) - 1) * defaults.DTSSD_SCALE


def sequence_report(pred_seq, gt_seq, region=None) -> MetricReport:
    """Per-frame means of MAD/MSE/Grad/Conn plus sequence dtSSD."""
    if len(pred_seq) != len(gt_seq):
        raise LengthMismatch(f"{len(pred_seq)} pred frames vs {len(gt_seq)} gt frames")
    if not pred_seq:
        raise SequenceTooShort("empty sequence")
    mads = [mad(p, g, region) for p, g in zip(pred_seq, gt_seq)]
    mses = [mse(p, g, region) for p, g in zip(pred_seq, gt_seq)]
    grads = [grad_metric(p, g) for p, g in zip(pred_seq, gt_seq)]
    conns = [conn_metric(p, g) for p, g in zip(pred_seq, gt_seq)]
    dt = dtssd(pred_seq, gt_seq, region) if len(pred_seq) >= 2 else None
    n = len(pred_seq)
    return MetricReport(
        mad=sum(mads) / n,
        mse=sum(mses) / n,
        grad=sum(grads) / n,
        conn=sum(conns) / n,
        dtssd=dt,
        frame_count=n,
    )
