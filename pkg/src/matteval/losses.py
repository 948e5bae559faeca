"""Training objectives in analytic form: masked L1 / Laplacian / temporal
losses over predicted mattes, focal + dice for the quality evaluator, the
guidance term on predicted error probabilities, and the combined totals.

Every loss returns its scalar value together with the exact gradient with
respect to the prediction, so finite-difference checks can hold to tight
tolerances. The Laplacian pyramid here is a linear operator built from a
5-tap binomial blur; its gradient is computed through the exact adjoint of
that operator, not an approximation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import defaults
from ._sepconv import correlate2d_separable, correlate2d_separable_adjoint
from .core import as_binary, as_prob
from .errors import DimensionMismatch


@dataclass(frozen=True)
class LossValue:
    """Scalar loss plus gradients.

    grad is d(value)/d(pred) for single-frame losses. Pair losses also fill
    grad_prev; batch totals fill frame_grads (one map per frame) and leave
    grad unset. components carries a per-term breakdown for reports.
    """

    value: float
    grad: Optional[np.ndarray] = None
    grad_prev: Optional[np.ndarray] = None
    frame_grads: Optional[tuple] = None
    components: Optional[dict] = None


def _as_field(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _check_triplet(pred, gt, region):
    p = _as_field(pred, "pred")
    g = _as_field(gt, "gt")
    r = as_binary(region, "region").astype(np.float64)
    if p.shape != g.shape or p.shape != r.shape:
        raise DimensionMismatch(f"pred {p.shape}, gt {g.shape}, region {r.shape}")
    return p, g, r


def masked_l1(pred, gt, region, epsilon: float = defaults.LOSS_EPSILON) -> LossValue:
    """L1 distance restricted to reliable pixels.

    value = sum(R * |pred - gt|) / (sum(R) + eps). The epsilon keeps an
    all-zero mask well defined (value 0) instead of raising.
    """
    p, g, r = _check_triplet(pred, gt, region)
    denom = r.sum() + epsilon
    diff = p - g
    value = float((r * np.abs(diff)).sum() / denom)
    grad = r * np.sign(diff) / denom
    return LossValue(value=value, grad=grad)


# --- Laplacian pyramid -------------------------------------------------
#
# Blur: separable 5-tap binomial (1,4,6,4,1)/16 with mirror borders that do
# not repeat the edge sample. Downsampling keeps odd-indexed rows/columns,
# so a level of side n shrinks to floor(n/2). Upsampling scatters back into
# the odd positions of the parent-sized grid, blurs, and multiplies by 2
# per axis. This pairing keeps upsample(constant) == constant to float
# round-off for any image size (including odd sides), so reconstruction
# reproduces the input to the last couple of ulps rather than merely
# approximating it.

_BINOMIAL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
_PYR_BORDER = "reflect"


def _blur(x: np.ndarray) -> np.ndarray:
    return correlate2d_separable(x, _BINOMIAL, _BINOMIAL, mode=_PYR_BORDER)


def _blur_adjoint(y: np.ndarray) -> np.ndarray:
    return correlate2d_separable_adjoint(y, _BINOMIAL, _BINOMIAL, mode=_PYR_BORDER)


def _reduce(x: np.ndarray) -> np.ndarray:
    return _blur(x)[1::2, 1::2]


def _reduce_adjoint(y: np.ndarray, parent_shape: tuple) -> np.ndarray:
    z = np.zeros(parent_shape, dtype=np.float64)
    z[1::2, 1::2] = y
    return _blur_adjoint(z)


def _upsample(x: np.ndarray, target_shape: tuple) -> np.ndarray:
    z = np.zeros(target_shape, dtype=np.float64)
    z[1::2, 1::2] = x
    return 4.0 * _blur(z)


def _upsample_adjoint(y: np.ndarray) -> np.ndarray:
    return 4.0 * _blur_adjoint(y)[1::2, 1::2]


def max_pyramid_levels(height: int, width: int) -> int:
    """Levels available before the coarsest map would lose its last pixel."""
    side = min(height, width)
    levels = 1
    while side >= 2:
        side //= 2
        levels += 1
    return levels


def _capped_levels(shape: tuple, levels: int) -> int:
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    allowed = max_pyramid_levels(shape[0], shape[1])
    if levels > allowed:
        warnings.warn(
            f"image {shape[0]}x{shape[1]} supports only {allowed} pyramid "
            f"levels, reducing from {levels}",
            RuntimeWarning,
            stacklevel=3,
        )
        return allowed
    return levels


def laplacian_pyramid(img, levels: int = defaults.PYRAMID_LEVELS) -> list:
    """Band decomposition: bands[s] = G_s - upsample(G_{s+1}), last band is
    the coarsest Gaussian level. Linear in the input; adding the upsampled
    bands back reproduces the image exactly."""
    x = _as_field(img, "img")
    levels = _capped_levels(x.shape, levels)
    gaussians = [x]
    for _ in range(levels - 1):
        gaussians.append(_reduce(gaussians[-1]))
    bands = []
    for s in range(levels - 1):
        bands.append(gaussians[s] - _upsample(gaussians[s + 1], gaussians[s].shape))
    bands.append(gaussians[-1])
    return bands


def reconstruct_pyramid(bands: Sequence[np.ndarray]) -> np.ndarray:
    if not bands:
        raise ValueError("need at least one band")
    g = np.asarray(bands[-1], dtype=np.float64)
    for band in bands[-2::-1]:
        g = np.asarray(band, dtype=np.float64) + _upsample(g, band.shape)
    return g


def _level_shapes(shape: tuple, levels: int) -> list:
    shapes = [shape]
    for _ in range(levels - 1):
        h, w = shapes[-1]
        shapes.append((h // 2, w // 2))
    return shapes


def _pull_to_full(band: np.ndarray, level: int, shapes: list) -> np.ndarray:
    """Upsample a level-`level` map back to full resolution."""
    out = band
    for k in range(level - 1, -1, -1):
        out = _upsample(out, shapes[k])
    return out


def _push_to_level(t: np.ndarray, level: int) -> np.ndarray:
    """Adjoint of _pull_to_full: full-res map down to level resolution."""
    for _ in range(level):
        t = _upsample_adjoint(t)
    return t


def _band_adjoint(t: np.ndarray, level: int, n_levels: int, shapes: list) -> np.ndarray:
    """Adjoint of x -> bands[level](x), taking a level-shaped map to full res."""

    def down_chain(y: np.ndarray, from_level: int) -> np.ndarray:
        for k in range(from_level - 1, -1, -1):
            y = _reduce_adjoint(y, shapes[k])
        return y

    if level == n_levels - 1:
        return down_chain(t, level)
    return down_chain(t, level) - down_chain(_upsample_adjoint(t), level + 1)


def masked_laplacian_loss(
    pred,
    gt,
    region,
    epsilon: float = defaults.LOSS_EPSILON,
    levels: int = defaults.PYRAMID_LEVELS,
) -> LossValue:
    """Multi-scale L1 on pyramid bands, masked at full resolution.

    Each band difference is upsampled back to the input resolution before
    the reliability mask is applied, so one mask and one denominator serve
    all scales. Level s (1-based) carries weight 2^(s-1)/levels; with the
    default 5 levels that is [1/5, 2/5, 4/5, 8/5, 16/5]. The gradient runs
    the exact adjoint of the band + upsample chain.
    """
    p, g, r = _check_triplet(pred, gt, region)
    levels = _capped_levels(p.shape, levels)
    shapes = _level_shapes(p.shape, levels)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        bands_p = laplacian_pyramid(p, levels)
        bands_g = laplacian_pyramid(g, levels)
    denom = r.sum() + epsilon
    value = 0.0
    grad = np.zeros_like(p)
    for s in range(levels):
        weight = float(2**s) / levels
        diff_full = _pull_to_full(bands_p[s] - bands_g[s], s, shapes)
        value += weight * float((r * np.abs(diff_full)).sum()) / denom
        t = weight * r * np.sign(diff_full) / denom
        grad += _band_adjoint(_push_to_level(t, s), s, levels, shapes)
    return LossValue(value=value, grad=grad)


def masked_tc_loss(
    pred_t,
    pred_prev,
    gt_t,
    gt_prev,
    region_t,
    region_prev,
    epsilon: float = defaults.LOSS_EPSILON,
) -> LossValue:
    """Temporal-coherence penalty on pixels reliable in both frames.

    Compares the predicted frame-to-frame change against the true change
    with a squared error, masked by R_t * R_prev. grad is with respect to
    pred_t; grad_prev (its negation) with respect to pred_prev.
    """
    pt, gtt, rt = _check_triplet(pred_t, gt_t, region_t)
    pp, gtp, rp = _check_triplet(pred_prev, gt_prev, region_prev)
    if pt.shape != pp.shape:
        raise DimensionMismatch(f"pred_t {pt.shape} vs pred_prev {pp.shape}")
    r_tc = rt * rp
    denom = r_tc.sum() + epsilon
    mismatch = (pt - pp) - (gtt - gtp)
    value = float((r_tc * mismatch**2).sum() / denom)
    grad = 2.0 * r_tc * mismatch / denom
    return LossValue(value=value, grad=grad, grad_prev=-grad)


def _check_prob_target(p, y):
    prob = as_prob(p, "p")
    target = as_binary(y, "y").astype(np.float64)
    if prob.shape != target.shape:
        raise DimensionMismatch(f"p {prob.shape} vs y {target.shape}")
    return prob, target


def focal_loss(
    p,
    y,
    gamma: float = defaults.FOCAL_GAMMA,
    alpha: float = defaults.FOCAL_ALPHA,
) -> LossValue:
    """Class-balanced focal loss, averaged over pixels.

    p is the predicted probability of class 1 (reliable); y the binary
    target. p is clamped away from {0, 1} before the logs, and the gradient
    is 0 where the clamp is active.
    """
    prob, target = _check_prob_target(p, y)
    lo, hi = defaults.PROB_CLAMP, 1.0 - defaults.PROB_CLAMP
    pc = np.clip(prob, lo, hi)
    pos = -alpha * (1.0 - pc) ** gamma * np.log(pc)
    neg = -(1.0 - alpha) * pc**gamma * np.log1p(-pc)
    value = float(np.mean(target * pos + (1.0 - target) * neg))

    n = prob.size
    dpos = alpha * gamma * (1.0 - pc) ** (gamma - 1.0) * np.log(pc) - alpha * (1.0 - pc) ** gamma / pc
    dneg = -(1.0 - alpha) * gamma * pc ** (gamma - 1.0) * np.log1p(-pc) + (1.0 - alpha) * pc**gamma / (1.0 - pc)
    grad = (target * dpos + (1.0 - target) * dneg) / n
    grad = np.where((prob >= lo) & (prob <= hi), grad, 0.0)
    return LossValue(value=value, grad=grad)


def dice_loss(p, y, smooth: float = defaults.DICE_SMOOTH) -> LossValue:
    """Soft dice overlap loss: 1 - (2*sum(p*y) + s) / (sum(p) + sum(y) + s)."""
    prob, target = _check_prob_target(p, y)
    num = 2.0 * float((prob * target).sum()) + smooth
    den = float(prob.sum()) + float(target.sum()) + smooth
    value = 1.0 - num / den
    grad = (num - 2.0 * target * den) / den**2
    return LossValue(value=value, grad=grad)


def eval_guidance_loss(p0) -> LossValue:
    """Mean predicted error probability; pushing it down rewards mattes the
    evaluator considers reliable. Mean (not sum) so the weight attached to
    this term is resolution independent."""
    prob = as_prob(p0, "p0")
    n = prob.size
    value = float(prob.mean())
    grad = np.full(prob.shape, 1.0 / n)
    return LossValue(value=value, grad=grad)


def mqe_total_loss(p, y, gamma: float = defaults.FOCAL_GAMMA, alpha: float = defaults.FOCAL_ALPHA, smooth: float = defaults.DICE_SMOOTH) -> LossValue:
    """Evaluator training objective: focal + dice, gradients summed."""
    f = focal_loss(p, y, gamma=gamma, alpha=alpha)
    d = dice_loss(p, y, smooth=smooth)
    return LossValue(
        value=f.value + d.value,
        grad=f.grad + d.grad,
        components={"focal": f.value, "dice": d.value},
    )


@dataclass
class LossFrame:
    """One frame of a training window: prediction, target, reliability mask
    and (optionally) the evaluator's error-probability map."""

    pred: np.ndarray
    gt: np.ndarray
    region: np.ndarray
    p0: Optional[np.ndarray] = None


def matting_total_loss(
    frames: Sequence[LossFrame],
    lambda_eval: float = defaults.LAMBDA_EVAL,
    epsilon: float = defaults.LOSS_EPSILON,
    levels: int = defaults.PYRAMID_LEVELS,
) -> LossValue:
    """Full matting objective over a window of frames.

    mean over frames of (masked L1 + masked Laplacian)
    + mean over consecutive pairs of the temporal term (needs >= 2 frames)
    + lambda_eval * mean over frames of the guidance term.

    frame_grads holds d(value)/d(pred_f) per frame; the guidance term does
    not reach the predictions here (the error maps are plain inputs), so it
    contributes value only.
    """
    if len(frames) == 0:
        raise ValueError("need at least one frame")
    n = len(frames)

    l1_sum = 0.0
    lap_sum = 0.0
    grads = []
    for fr in frames:
        l1 = masked_l1(fr.pred, fr.gt, fr.region, epsilon)
        lap = masked_laplacian_loss(fr.pred, fr.gt, fr.region, epsilon, levels)
        l1_sum += l1.value
        lap_sum += lap.value
        grads.append((l1.grad + lap.grad) / n)

    tc_mean = 0.0
    if n >= 2:
        tc_sum = 0.0
        for t in range(1, n):
            prev, cur = frames[t - 1], frames[t]
            tc = masked_tc_loss(
                cur.pred, prev.pred, cur.gt, prev.gt, cur.region, prev.region, epsilon
            )
            tc_sum += tc.value
            grads[t] = grads[t] + tc.grad / (n - 1)
            grads[t - 1] = grads[t - 1] + tc.grad_prev / (n - 1)
        tc_mean = tc_sum / (n - 1)

    with_p0 = [fr.p0 for fr in frames if fr.p0 is not None]
    eval_mean = 0.0
    if with_p0:
        eval_mean = float(np.mean([eval_guidance_loss(p0).value for p0 in with_p0]))

    value = l1_sum / n + lap_sum / n + tc_mean + lambda_eval * eval_mean
    return LossValue(
        value=value,
        frame_grads=tuple(grads),
        components={
            "l1": l1_sum / n,
            "laplacian": lap_sum / n,
            "temporal": tc_mean,
            "eval_guidance": eval_mean,
            "lambda_eval": lambda_eval,
        },
    )
