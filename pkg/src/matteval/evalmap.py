"""Patch-level pseudo ground truth for evaluation maps, plus the pluggable
evaluator interface and the non-reference ERR/MER/BER metrics.

The discrepancy between a predicted and a reference matte is measured per
cell of a grid of non-overlapping patches as a weighted combination of MAD
and Grad, min-max normalized per image, then thresholded: cells below the
threshold are reliable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from scipy import ndimage

from . import defaults
from .core import AlphaMatte, EvalMap, ProbMap, as_alpha, as_binary, as_prob, binarize_prob
from .errors import DimensionMismatch, GridError
from .metrics import grad_metric, mad


@dataclass(frozen=True)
class PatchGrid:
    """Partition of an image into rows x cols non-overlapping cells.

    Cell heights (and widths) differ by at most one pixel; remainder pixels
    go to the first rows (columns). Edges are cumulative pixel offsets.
    """

    rows: int
    cols: int
    row_edges: tuple
    col_edges: tuple

    @property
    def height(self) -> int:
        return self.row_edges[-1]

    @property
    def width(self) -> int:
        return self.col_edges[-1]

    def cell_bounds(self, r: int, c: int) -> tuple:
        """(top, left, height, width) of cell (r, c)."""
        top, bottom = self.row_edges[r], self.row_edges[r + 1]
        left, right = self.col_edges[c], self.col_edges[c + 1]
        return top, left, bottom - top, right - left

    def iter_cells(self) -> Iterator[tuple]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield r, c, self.cell_bounds(r, c)

    def crop(self, arr: np.ndarray, r: int, c: int) -> np.ndarray:
        top, left, h, w = self.cell_bounds(r, c)
        return arr[top : top + h, left : left + w]


def _edges(total: int, parts: int) -> tuple:
    base, rem = divmod(total, parts)
    sizes = [base + 1] * rem + [base] * (parts - rem)
    edges = [0]
    for s in sizes:
        edges.append(edges[-1] + s)
    return tuple(edges)


def make_patch_grid(
    height: int,
    width: int,
    rows: int = defaults.GRID_ROWS,
    cols: int = defaults.GRID_COLS,
) -> PatchGrid:
    if rows < 1 or cols < 1:
        raise ValueError("grid must have at least one row and column")
    if height < rows or width < cols:
        raise GridError(f"image {height}x{width} smaller than grid {rows}x{cols}")
    return PatchGrid(rows=rows, cols=cols, row_edges=_edges(height, rows), col_edges=_edges(width, cols))


def patch_discrepancy(
    pred,
    gt,
    grid: PatchGrid,
    w_mad: float = defaults.D_WEIGHT_MAD,
    w_grad: float = defaults.D_WEIGHT_GRAD,
) -> np.ndarray:
    """Per-cell weighted discrepancy w_mad * MAD + w_grad * Grad.

    Each term is computed on the cell crop with the module-level metric
    definitions (so cell Grad sees only the crop, reflect-padded).
    """
    p = as_alpha(pred, "pred")
    g = as_alpha(gt, "gt")
    if p.shape != g.shape:
        raise DimensionMismatch(f"pred {p.shape} vs gt {g.shape}")
    if (p.shape[0], p.shape[1]) != (grid.height, grid.width):
        raise DimensionMismatch(f"image {p.shape} vs grid {grid.height}x{grid.width}")
    scores = np.zeros((grid.rows, grid.cols))
    for r, c, _ in grid.iter_cells():
        cp = grid.crop(p, r, c)
        cg = grid.crop(g, r, c)
        scores[r, c] = w_mad * mad(cp, cg) + w_grad * grad_metric(cp, cg)
    return scores


def normalize_minmax(scores: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; a constant input maps to all zeros."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("need at least one score")
    lo = float(s.min())
    hi = float(s.max())
    if hi == lo:
        return np.zeros_like(s)
    return (s - lo) / (hi - lo)


def broadcast_cells(grid: PatchGrid, cell_values: np.ndarray) -> np.ndarray:
    """Expand a (rows, cols) array of cell values to a full-resolution map."""
    vals = np.asarray(cell_values)
    if vals.shape != (grid.rows, grid.cols):
        raise DimensionMismatch(f"cell array {vals.shape} vs grid {grid.rows}x{grid.cols}")
    out = np.empty((grid.height, grid.width), dtype=np.float64)
    for r, c, (top, left, h, w) in grid.iter_cells():
        out[top : top + h, left : left + w] = vals[r, c]
    return out


def oracle_prob_map(pred, gt, grid: Optional[PatchGrid] = None) -> ProbMap:
    """Ground-truth-based error-probability map: the normalized per-cell
    discrepancy broadcast to pixels. Stand-in for a learned evaluator."""
    p = as_alpha(pred, "pred")
    if grid is None:
        grid = make_patch_grid(p.shape[0], p.shape[1])
    norm = normalize_minmax(patch_discrepancy(pred, gt, grid))
    return as_prob(broadcast_cells(grid, norm))


def pseudo_gt_map(
    pred,
    gt,
    delta: float = defaults.DELTA,
    grid: Optional[PatchGrid] = None,
) -> EvalMap:
    """Binary pseudo ground truth: cell reliable iff its normalized
    discrepancy is strictly below delta; thresholded per cell, then
    broadcast to pixels."""
    p = as_alpha(pred, "pred")
    if grid is None:
        grid = make_patch_grid(p.shape[0], p.shape[1])
    norm = normalize_minmax(patch_discrepancy(pred, gt, grid))
    reliable = (norm < delta).astype(np.uint8)
    return as_binary(broadcast_cells(grid, reliable))


def boundary_band(mask, width: int = defaults.BAND_WIDTH) -> np.ndarray:
    """Band of pixels around the mask edge: dilation XOR erosion with a
    square structuring element of side 2*width + 1. Out-of-image pixels are
    treated as background, so erosion shrinks masks at the image border."""
    if width < 1:
        raise ValueError(f"band width must be >= 1, got {width}")
    m = as_binary(mask, "mask").astype(bool)
    structure = np.ones((2 * width + 1, 2 * width + 1), dtype=bool)
    dilated = ndimage.binary_dilation(m, structure=structure, border_value=0)
    eroded = ndimage.binary_erosion(m, structure=structure, border_value=0)
    return as_binary((dilated ^ eroded).astype(np.uint8))


@dataclass(frozen=True)
class NonRefReport:
    """Unreliable-pixel percentages: overall, foreground, boundary band."""

    err: float
    mer: float
    ber: float
    warnings: tuple = ()


def nonref_metrics(eval_map, seg, band_width: int = defaults.BAND_WIDTH) -> NonRefReport:
    """ERR/MER/BER percentages from a binary evaluation map.

    ERR counts unreliable pixels over the frame, MER over the foreground
    (seg == 1), BER over the boundary band of seg. An empty denominator
    yields 0 together with a warning flag.
    """
    ev = as_binary(eval_map, "eval")
    sg = as_binary(seg, "seg")
    if ev.shape != sg.shape:
        raise DimensionMismatch(f"eval {ev.shape} vs seg {sg.shape}")
    unreliable = ev == 0
    warnings = []
    err = 100.0 * float(np.count_nonzero(unreliable)) / ev.size

    fg = sg == 1
    n_fg = int(np.count_nonzero(fg))
    if n_fg == 0:
        mer = 0.0
        warnings.append("empty foreground: MER undefined, reported as 0")
    else:
        mer = 100.0 * float(np.count_nonzero(unreliable & fg)) / n_fg

    band = boundary_band(sg, band_width).astype(bool)
    n_band = int(np.count_nonzero(band))
    if n_band == 0:
        ber = 0.0
        warnings.append("empty boundary band: BER undefined, reported as 0")
    else:
        ber = 100.0 * float(np.count_nonzero(unreliable & band)) / n_band
    return NonRefReport(err=err, mer=mer, ber=ber, warnings=tuple(warnings))


@dataclass
class FrameBundle:
    """Everything an evaluator may look at for one frame and one branch."""

    frame_id: str
    branch: str  # "v" | "i"
    alpha: AlphaMatte
    rgb: Optional[np.ndarray] = None
    seg: Optional[np.ndarray] = None
    gt: Optional[AlphaMatte] = None
    prob_path: Optional[Path] = None


class EvaluatorPlugin:
    """Maps (frame, alpha, mask) to a per-pixel error-probability map."""

    name = "abstract"

    def evaluate(self, bundle: FrameBundle) -> ProbMap:
        raise NotImplementedError

    def __call__(self, bundle: FrameBundle) -> ProbMap:
        prob = self.evaluate(bundle)
        prob = as_prob(prob, name=f"{self.name} output")
        if prob.shape != bundle.alpha.shape:
            raise DimensionMismatch(
                f"evaluator returned {prob.shape}, frame is {bundle.alpha.shape}"
            )
        return prob


@dataclass
class OracleEvaluator(EvaluatorPlugin):
    """Reference evaluator: patch discrepancy against the true matte.

    Requires ground truth in the bundle; used for tests and for pipelines
    where reference alphas exist.
    """

    grid_rows: int = defaults.GRID_ROWS
    grid_cols: int = defaults.GRID_COLS
    name: str = field(default="oracle", init=False)

    def evaluate(self, bundle: FrameBundle) -> ProbMap:
        if bundle.gt is None:
            raise ValueError(f"oracle evaluator needs ground truth (frame {bundle.frame_id})")
        grid = make_patch_grid(bundle.alpha.shape[0], bundle.alpha.shape[1], self.grid_rows, self.grid_cols)
        return oracle_prob_map(bundle.alpha, bundle.gt, grid)


@dataclass
class ManifestProbEvaluator(EvaluatorPlugin):
    """Reads the probability map recorded in the manifest for this frame."""

    name: str = field(default="manifest", init=False)

    def evaluate(self, bundle: FrameBundle) -> ProbMap:
        if bundle.prob_path is None:
            raise ValueError(
                f"manifest has no prob_{bundle.branch}_path for frame {bundle.frame_id}"
            )
        from .imgio import load_prob

        return load_prob(bundle.prob_path)


@dataclass
class DirectoryEvaluator(EvaluatorPlugin):
    """Looks up precomputed maps as <dir>/<frame_id>_<branch>.pfm."""

    directory: Path
    name: str = field(default="directory", init=False)

    def evaluate(self, bundle: FrameBundle) -> ProbMap:
        from .imgio import load_prob

        path = Path(self.directory) / f"{bundle.frame_id}_{bundle.branch}.pfm"
        if not path.exists():
            raise FileNotFoundError(f"no precomputed map {path}")
        return load_prob(path)


def make_evaluator(spec: str) -> EvaluatorPlugin:
    """Build an evaluator from a CLI spec: 'oracle', 'manifest' or 'dir:PATH'."""
    if spec == "oracle":
        return OracleEvaluator()
    if spec == "manifest":
        return ManifestProbEvaluator()
    if spec.startswith("dir:"):
        return DirectoryEvaluator(directory=Path(spec[4:]))
    raise ValueError(f"unknown evaluator spec {spec!r} (use oracle | manifest | dir:PATH)")
