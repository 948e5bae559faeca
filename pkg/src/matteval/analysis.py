"""Correlation between predicted error probabilities and true patch
discrepancies: pair collection, fixed 30-bin aggregation over [0, 1], and
Pearson r on the raw pairs.

This module stays plotting-free on purpose; it emits the numbers (CSV plot
data + summary dict) and leaves rendering to callers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import defaults
from .core import as_prob
from .errors import DimensionMismatch
from .evalmap import PatchGrid


def collect_pairs(pred_probs, gt_scores, grid: PatchGrid) -> List[Tuple[float, float]]:
    """One (gt_score, mean predicted error) pair per grid cell per frame.

    pred_probs: per-frame error-probability maps at grid resolution;
    gt_scores: per-frame (rows, cols) arrays of normalized discrepancies in
    [0, 1]. The predicted value for a cell is the mean probability inside
    it.
    """
    if len(pred_probs) != len(gt_scores):
        raise DimensionMismatch(f"{len(pred_probs)} prob maps vs {len(gt_scores)} score arrays")
    pairs: List[Tuple[float, float]] = []
    for k, (prob, scores) in enumerate(zip(pred_probs, gt_scores)):
        p = as_prob(prob, f"pred_probs[{k}]")
        s = np.asarray(scores, dtype=np.float64)
        if p.shape != (grid.height, grid.width):
            raise DimensionMismatch(f"pred_probs[{k}] {p.shape} vs grid {grid.height}x{grid.width}")
        if s.shape != (grid.rows, grid.cols):
            raise DimensionMismatch(f"gt_scores[{k}] {s.shape} vs grid {grid.rows}x{grid.cols}")
        if s.min() < 0.0 or s.max() > 1.0:
            raise ValueError(f"gt_scores[{k}] outside [0, 1]")
        for r, c, _ in grid.iter_cells():
            pairs.append((float(s[r, c]), float(grid.crop(p, r, c).mean())))
    return pairs


@dataclass(frozen=True)
class BinRecord:
    lower: float
    upper: float
    mean_pred: Optional[float]
    std_pred: Optional[float]  # sample std (n-1); None below two members
    count: int


@dataclass(frozen=True)
class BinnedCorrelation:
    bins: tuple
    pearson_r: Optional[float]
    total_pairs: int
    degenerate_reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "pearson_r": self.pearson_r,
            "total_pairs": self.total_pairs,
            "degenerate_reason": self.degenerate_reason,
            "bins": [
                {
                    "lower": b.lower,
                    "upper": b.upper,
                    "mean_pred": b.mean_pred,
                    "std_pred": b.std_pred,
                    "count": b.count,
                }
                for b in self.bins
            ],
        }


def _pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Textbook covariance form with a single square root, so that feeding
    a series against a bitwise copy of itself gives exactly 1.0."""
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float((dx * dy).sum()) / float(np.sqrt(sxx * syy))
    return float(np.clip(r, -1.0, 1.0))


def bin_and_correlate(pairs: Sequence[Tuple[float, float]], n_bins: int = defaults.CORRELATION_BINS) -> BinnedCorrelation:
    """Aggregate pairs into uniform gt-score bins and correlate.

    Bins partition [0, 1]; each bin is [lower, upper) except the last,
    which includes 1.0. Per-bin stats describe the predicted values;
    Pearson r is computed on the raw, unbinned pairs. Degenerate variance
    on either axis makes r None with a reason instead of raising.
    """
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    if len(pairs) == 0:
        raise ValueError("no pairs to analyze")
    gt = np.array([p[0] for p in pairs], dtype=np.float64)
    pred = np.array([p[1] for p in pairs], dtype=np.float64)
    if gt.min() < 0.0 or gt.max() > 1.0 or pred.min() < 0.0 or pred.max() > 1.0:
        raise ValueError("pairs must lie in [0, 1] on both axes")

    edges = np.linspace(0.0, 1.0, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, gt, side="right") - 1, 0, n_bins - 1)
    bins = []
    for b in range(n_bins):
        members = pred[idx == b]
        count = int(members.size)
        mean = float(members.mean()) if count else None
        std = float(members.std(ddof=1)) if count >= 2 else None
        bins.append(BinRecord(lower=float(edges[b]), upper=float(edges[b + 1]), mean_pred=mean, std_pred=std, count=count))

    reason = None
    if len(pairs) < 2:
        r = None
        reason = "fewer than two pairs"
    else:
        r = _pearson(gt, pred)
        if r is None:
            reason = "zero variance on at least one axis"
    return BinnedCorrelation(bins=tuple(bins), pearson_r=r, total_pairs=len(pairs), degenerate_reason=reason)


def write_plot_csv(binned: BinnedCorrelation, path) -> None:
    """Plot-data export: one row per bin, empty cells for undefined stats."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lower", "bin_upper", "mean_pred", "std_pred", "count"])
        for b in binned.bins:
            writer.writerow(
                [
                    repr(b.lower),
                    repr(b.upper),
                    "" if b.mean_pred is None else repr(b.mean_pred),
                    "" if b.std_pred is None else repr(b.std_pred),
                    b.count,
                ]
            )
