"""Separable correlation on 2-D maps with exact linear adjoints.

Border handling is expressed through an index map built with np.pad, so the
forward pass is a gather and the adjoint is the matching scatter
(np.add.at). Two border modes are used in the toolkit:

* "symmetric" -- half-sample reflection (edge pixel repeated), used by the
  reference metrics and the fusion blur;
* "reflect"   -- whole-sample reflection, used inside the Laplacian pyramid
  where it keeps constant images exactly constant under up/downsampling.
"""

from __future__ import annotations

import numpy as np


def _pad_indices(n: int, radius: int, mode: str) -> np.ndarray:
    return np.pad(np.arange(n), radius, mode=mode)


def correlate1d(x: np.ndarray, kernel: np.ndarray, axis: int, mode: str) -> np.ndarray:
    """Same-size correlation of a 2-D array along one axis."""
    k = np.asarray(kernel, dtype=np.float64)
    if k.size % 2 != 1:
        raise ValueError("kernel length must be odd")
    radius = k.size // 2
    moved = np.moveaxis(np.asarray(x, dtype=np.float64), axis, 0)
    n = moved.shape[0]
    padded = moved[_pad_indices(n, radius, mode)]
    out = np.zeros_like(moved)
    for j in range(k.size):
        out += k[j] * padded[j : j + n]
    return np.moveaxis(out, 0, axis)


def correlate1d_adjoint(y: np.ndarray, kernel: np.ndarray, axis: int, mode: str) -> np.ndarray:
    """Adjoint of correlate1d under the standard inner product."""
    k = np.asarray(kernel, dtype=np.float64)
    radius = k.size // 2
    moved = np.moveaxis(np.asarray(y, dtype=np.float64), axis, 0)
    n = moved.shape[0]
    acc = np.zeros((n + 2 * radius,) + moved.shape[1:])
    for j in range(k.size):
        acc[j : j + n] += k[j] * moved
    out = np.zeros_like(moved)
    np.add.at(out, _pad_indices(n, radius, mode), acc)
    return np.moveaxis(out, 0, axis)


def correlate2d_separable(x, kernel_y, kernel_x, mode):
    return correlate1d(correlate1d(x, kernel_y, axis=0, mode=mode), kernel_x, axis=1, mode=mode)


def correlate2d_separable_adjoint(y, kernel_y, kernel_x, mode):
    return correlate1d_adjoint(
        correlate1d_adjoint(y, kernel_x, axis=1, mode=mode), kernel_y, axis=0, mode=mode
    )


def gaussian_kernel(sigma: float, radius: int, normalize: bool = True) -> np.ndarray:
    """Discretely sampled Gaussian; normalized to unit sum unless disabled."""
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    if normalize:
        g /= g.sum()
        # nudge the center tap toward unit sum; pairwise summation keeps
        # the result within one ulp of 1.0 but not always exactly there
        g[radius] += 1.0 - g.sum()
    else:
        g /= sigma * np.sqrt(2.0 * np.pi)
    return g


def gaussian_deriv_kernel(sigma: float, radius: int) -> np.ndarray:
    """Sampled first derivative of a (normalized-density) Gaussian."""
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2)) / (sigma * np.sqrt(2.0 * np.pi))
    return -x / sigma**2 * g
