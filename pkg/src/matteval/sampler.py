"""Deterministic reference-frame sampling and patch-dropout augmentation.

All randomness flows through a counter-based Philox generator keyed as
(seed, stream). The stream component splits independent draws (one stream
per frame index for augmentation) so frames can be processed in parallel
without sharing generator state. Identical (inputs, seed, stream) give
bit-identical outputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import defaults
from .core import as_alpha, as_binary, as_rgb
from .errors import DimensionMismatch, SequenceTooShort, TooManyReferences


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream); the documented source of
    every random draw in the package."""
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class WindowPlan:
    """A contiguous training window plus long-range reference frames."""

    sequence_length: int
    window_indices: tuple
    reference_indices: tuple

    def __post_init__(self):
        w = set(self.window_indices)
        r = set(self.reference_indices)
        if w & r:
            raise ValueError("reference indices overlap the window")
        for i in w | r:
            if not (0 <= i < self.sequence_length):
                raise ValueError(f"index {i} outside sequence of length {self.sequence_length}")


def plan_window(
    sequence_length: int,
    window: int = defaults.WINDOW_SIZE,
    n_refs: int = 0,
    rng_seed: int = 0,
    stream: int = 0,
) -> WindowPlan:
    """Choose a training window and reference frames outside it.

    The window is a contiguous block whose offset is uniform over all valid
    positions. References are drawn uniformly without replacement from the
    frames outside the window (a partial Fisher-Yates shuffle, so the draw
    count, not the pool size, bounds the work).
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if n_refs < 0:
        raise ValueError(f"n_refs must be >= 0, got {n_refs}")
    if sequence_length <= window:
        raise SequenceTooShort(
            f"sequence of {sequence_length} frames leaves no room outside a {window}-frame window"
        )
    outside_count = sequence_length - window
    if n_refs > outside_count:
        raise TooManyReferences(f"{n_refs} references requested, only {outside_count} frames outside the window")

    rng = make_rng(rng_seed, stream)
    offset = int(rng.integers(0, sequence_length - window + 1))
    window_indices = tuple(range(offset, offset + window))

    pool = [i for i in range(sequence_length) if i < offset or i >= offset + window]
    chosen = []
    for k in range(n_refs):
        j = int(rng.integers(k, len(pool)))
        pool[k], pool[j] = pool[j], pool[k]
        chosen.append(pool[k])
    return WindowPlan(
        sequence_length=sequence_length,
        window_indices=window_indices,
        reference_indices=tuple(sorted(chosen)),
    )


@dataclass(frozen=True)
class DropoutSpec:
    """Bounds and seed for patch dropout on a reference frame.

    Patch counts are drawn uniformly in [0, max]; sides uniformly in
    [side_min, side_max] pixels (clamped to the image). stream should be
    the frame index so each frame gets an independent draw sequence.
    """

    max_boundary_patches: int = defaults.MAX_BOUNDARY_PATCHES
    max_nonboundary_patches: int = defaults.MAX_NONBOUNDARY_PATCHES
    side_min: int = defaults.PATCH_SIDE_MIN
    side_max: int = defaults.PATCH_SIDE_MAX
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if self.max_boundary_patches < 0 or self.max_nonboundary_patches < 0:
            raise ValueError("patch counts must be >= 0")
        if not (1 <= self.side_min <= self.side_max):
            raise ValueError(f"need 1 <= side_min <= side_max, got [{self.side_min}, {self.side_max}]")


@dataclass(frozen=True)
class AppliedPatch:
    """One zeroed rectangle, recorded so a run can be replayed exactly."""

    kind: str  # "boundary" | "nonboundary"
    top: int
    left: int
    height: int
    width: int
    center_row: int
    center_col: int


def _place_patch(center_r: int, center_c: int, side: int, h: int, w: int) -> tuple:
    ph = min(side, h)
    pw = min(side, w)
    top = min(max(center_r - ph // 2, 0), h - ph)
    left = min(max(center_c - pw // 2, 0), w - pw)
    return top, left, ph, pw


def dropout_augment(rgb, alpha, boundary, spec: DropoutSpec):
    """Zero out random square patches in both rgb and alpha.

    Draws k_b patches centered on boundary pixels and k_n centered on
    non-boundary pixels (counts uniform in [0, max]); rectangles are
    clamped in-bounds. Requested categories with no eligible center pixels
    are skipped with a warning. Returns (rgb, alpha, applied patches);
    inputs are not modified.
    """
    frame = as_rgb(rgb, "rgb")
    a = as_alpha(alpha, "alpha")
    band = as_binary(boundary, "boundary")
    if frame.shape[:2] != a.shape or a.shape != band.shape:
        raise DimensionMismatch(f"rgb {frame.shape[:2]}, alpha {a.shape}, boundary {band.shape}")
    h, w = a.shape

    rng = make_rng(spec.seed, spec.stream)
    k_b = int(rng.integers(0, spec.max_boundary_patches + 1))
    k_n = int(rng.integers(0, spec.max_nonboundary_patches + 1))

    out_rgb = frame.copy()
    out_alpha = a.copy()
    patches = []
    for kind, count, want in (("boundary", k_b, 1), ("nonboundary", k_n, 0)):
        if count == 0:
            continue
        rows, cols = np.nonzero(band == want)
        if rows.size == 0:
            warnings.warn(
                f"no eligible {kind} center pixels, skipping {count} patch(es)",
                RuntimeWarning,
                stacklevel=2,
            )
            continue
        for _ in range(count):
            side = int(rng.integers(spec.side_min, spec.side_max + 1))
            pick = int(rng.integers(0, rows.size))
            cr, cc = int(rows[pick]), int(cols[pick])
            top, left, ph, pw = _place_patch(cr, cc, side, h, w)
            out_rgb[top : top + ph, left : left + pw, :] = 0.0
            out_alpha[top : top + ph, left : left + pw] = 0.0
            patches.append(
                AppliedPatch(kind=kind, top=top, left=left, height=ph, width=pw, center_row=cr, center_col=cc)
            )
    return as_rgb(out_rgb), as_alpha(out_alpha), patches


def boundary_from_alpha(alpha, threshold: float = defaults.BINARIZE_THRESHOLD, width: int = defaults.BAND_WIDTH):
    """Default boundary band for dropout: the alpha binarized at 0.5,
    dilated/eroded band of the given width."""
    from .evalmap import boundary_band

    a = as_alpha(alpha, "alpha")
    hard = (a >= threshold).astype(np.uint8)
    return boundary_band(hard, width)
