"""Core in-memory representations: alpha mattes, masks, probability maps.

All maps are plain numpy arrays with a validated dtype/range contract:

* alpha mattes and probability maps -- float64, shape (H, W), values in [0, 1]
* RGB frames                        -- float64, shape (H, W, 3), values in [0, 1]
* segmentation / evaluation maps    -- uint8, shape (H, W), values in {0, 1}

Constructors return read-only arrays; operations never mutate their inputs.
Quantized integer encodings exist only at I/O boundaries (see imgio).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, RangeViolation

# Semantic aliases; all are numpy arrays with the contracts described above.
AlphaMatte = np.ndarray
RgbFrame = np.ndarray
SegMask = np.ndarray
EvalMap = np.ndarray
ProbMap = np.ndarray


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _first_bad_index(bad: np.ndarray) -> tuple:
    flat = int(np.argmax(bad.reshape(-1)))
    return tuple(int(i) for i in np.unravel_index(flat, bad.shape))


def as_alpha(values, name: str = "alpha") -> AlphaMatte:
    """Validate and return a unit-interval float map (copy, read-only)."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name}: expected a 2-D map, got shape {arr.shape}")
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if bad.any():
        idx = _first_bad_index(bad)
        raise RangeViolation(f"{name}: value {arr[idx]} at index {idx} outside [0, 1]")
    return _freeze(arr)


def as_prob(values, name: str = "prob") -> ProbMap:
    """Probability maps share the alpha contract (float in [0, 1])."""
    return as_alpha(values, name=name)


def as_rgb(values, name: str = "rgb") -> RgbFrame:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionMismatch(f"{name}: expected shape (H, W, 3), got {arr.shape}")
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if bad.any():
        idx = _first_bad_index(bad)
        raise RangeViolation(f"{name}: value {arr[idx]} at index {idx} outside [0, 1]")
    return _freeze(arr)


def as_binary(values, name: str = "mask") -> EvalMap:
    """Validate and return a strict {0, 1} uint8 map (copy, read-only)."""
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name}: expected a 2-D map, got shape {arr.shape}")
    if arr.dtype == bool:
        return _freeze(arr.astype(np.uint8))
    bad = ~np.isin(arr, (0, 1))
    if bad.any():
        idx = _first_bad_index(bad)
        raise RangeViolation(f"{name}: value {arr[idx]} at index {idx} not in {{0, 1}}")
    return _freeze(arr.astype(np.uint8))


def from_quantized(raw, bit_depth: int) -> AlphaMatte:
    """Map integer samples to [0, 1] by dividing by the dtype maximum.

    raw / (2**bit_depth - 1); the mapping round-trips exactly through
    quantize() at the same depth.
    """
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    arr = np.asarray(raw)
    if arr.ndim != 2:
        raise DimensionMismatch(f"quantized input must be 2-D, got shape {arr.shape}")
    peak = (1 << bit_depth) - 1
    vals = arr.astype(np.int64)
    bad = (vals < 0) | (vals > peak)
    if bad.any():
        idx = _first_bad_index(bad)
        raise RangeViolation(
            f"raw value {vals[idx]} at index {idx} does not fit {bit_depth}-bit depth"
        )
    return _freeze(vals.astype(np.float64) / peak)


def quantize(alpha: AlphaMatte, bit_depth: int) -> np.ndarray:
    """Inverse of from_quantized: round to the nearest representable level."""
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    a = as_alpha(alpha)
    peak = (1 << bit_depth) - 1
    out = np.rint(a * peak).astype(np.uint8 if bit_depth == 8 else np.uint16)
    return _freeze(out)


def binarize_prob(p: ProbMap, threshold: float = 0.5) -> EvalMap:
    """Turn an error-probability map into a binary evaluation map.

    A pixel is reliable (1) iff its error probability is strictly below
    the threshold; the boundary value maps to unreliable (0).
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    prob = as_prob(p)
    return _freeze((prob < threshold).astype(np.uint8))


def validate_pair(a: np.ndarray, b: np.ndarray) -> None:
    """Check that two maps share dimensions and satisfy their invariants.

    Float maps are checked against [0, 1]; integer/bool maps against {0, 1}.
    Raises DimensionMismatch or RangeViolation (reporting the first
    offending index in row-major order).
    """
    aa = np.asarray(a)
    bb = np.asarray(b)
    if aa.shape[:2] != bb.shape[:2]:
        raise DimensionMismatch(f"shape {aa.shape} vs {bb.shape}")
    for name, arr in (("first", aa), ("second", bb)):
        if arr.dtype.kind == "f":
            as_alpha(arr, name=name)
        else:
            as_binary(arr, name=name)
