"""Raster IO with bit-exact guarantees.

Continuous maps (mattes, probabilities, soft masks) travel as grayscale
PFM: header `Pf`, ASCII width/height, scale -1.0 (meaning little-endian),
then float32 rows stored bottom-up. The writer always emits that exact
layout; the reader also accepts big-endian files (positive scale).
Quantized mattes use 8- or 16-bit grayscale PNG; binary maps use 8-bit PNG
restricted to {0, 255}, and the loader rejects anything in between.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .core import AlphaMatte, EvalMap, as_alpha, as_binary, as_prob, from_quantized, quantize
from .errors import CorruptHeader, DimensionOverflow, RangeViolation, UnsupportedFormat

MAX_SIDE = 1 << 20
MAX_PIXELS = 1 << 26


def _check_dims(width: int, height: int, where: str) -> None:
    if width < 1 or height < 1:
        raise CorruptHeader(f"{where}: non-positive dimensions {width}x{height}")
    if width > MAX_SIDE or height > MAX_SIDE or width * height > MAX_PIXELS:
        raise DimensionOverflow(f"{where}: {width}x{height} exceeds the supported size")


# --- PFM ----------------------------------------------------------------


def save_pfm(path, values: np.ndarray) -> None:
    """Write a 2-D float map as little-endian grayscale PFM (float32)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise UnsupportedFormat(f"PFM writer needs a 2-D map, got shape {arr.shape}")
    h, w = arr.shape
    _check_dims(w, h, str(path))
    data = np.flipud(arr.astype("<f4")).tobytes()
    with Path(path).open("wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(data)


def _next_token(fh: io.BufferedReader, where: str) -> bytes:
    tok = b""
    while True:
        ch = fh.read(1)
        if ch == b"":
            raise CorruptHeader(f"{where}: truncated header")
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch
        if len(tok) > 32:
            raise CorruptHeader(f"{where}: header token too long")


def load_pfm(path) -> np.ndarray:
    """Read a grayscale PFM into a float64 array (top-down row order)."""
    where = str(path)
    with Path(path).open("rb") as fh:
        magic = fh.read(2)
        if magic == b"PF":
            raise UnsupportedFormat(f"{where}: color PFM not supported, expected grayscale 'Pf'")
        if magic != b"Pf":
            raise CorruptHeader(f"{where}: bad magic {magic!r}, expected b'Pf'")
        try:
            width = int(_next_token(fh, where))
            height = int(_next_token(fh, where))
            scale = float(_next_token(fh, where))
        except ValueError as exc:
            raise CorruptHeader(f"{where}: malformed header ({exc})") from exc
        _check_dims(width, height, where)
        if scale == 0.0:
            raise CorruptHeader(f"{where}: zero scale")
        dtype = "<f4" if scale < 0 else ">f4"
        raw = fh.read(4 * width * height)
    if len(raw) != 4 * width * height:
        raise CorruptHeader(f"{where}: expected {4 * width * height} raster bytes, got {len(raw)}")
    img = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    return np.flipud(img).astype(np.float64)


# --- PNG ----------------------------------------------------------------


def _open_png(path) -> Image.Image:
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise CorruptHeader(f"{path}: cannot decode ({exc})") from exc
    _check_dims(img.width, img.height, str(path))
    return img


def _gray_array(path) -> tuple:
    """(array, bit_depth) from a grayscale PNG; rejects color inputs."""
    img = _open_png(path)
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8), 8
    if img.mode in ("I;16", "I;16B", "I;16L"):
        return np.asarray(img, dtype=np.uint16), 16
    if img.mode == "I":
        arr = np.asarray(img, dtype=np.int32)
        if arr.min() < 0 or arr.max() > 65535:
            raise UnsupportedFormat(f"{path}: integer PNG outside 16-bit range")
        return arr.astype(np.uint16), 16
    raise UnsupportedFormat(f"{path}: mode {img.mode}, expected 8- or 16-bit grayscale")


def save_gray_png(path, alpha, bit_depth: int = 16) -> None:
    q = quantize(as_alpha(alpha), bit_depth)
    h, w = q.shape
    _check_dims(w, h, str(path))
    if bit_depth == 8:
        Image.fromarray(q, mode="L").save(path, format="PNG")
    else:
        # little-endian uint16 infers mode I;16
        Image.fromarray(q.astype("<u2")).save(path, format="PNG")


# --- typed entry points -------------------------------------------------


def _route(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return "pfm"
    if suffix == ".png":
        return "png"
    raise UnsupportedFormat(f"{path}: unsupported extension {suffix!r} (use .pfm or .png)")


def save_alpha(path, alpha, bit_depth: int = 16) -> None:
    """Matte to disk: PFM keeps full float32 precision, PNG quantizes."""
    a = as_alpha(alpha)
    if _route(path) == "pfm":
        save_pfm(path, a)
    else:
        save_gray_png(path, a, bit_depth)


def load_alpha(path) -> AlphaMatte:
    if _route(path) == "pfm":
        return as_alpha(load_pfm(path), str(path))
    arr, depth = _gray_array(path)
    return from_quantized(arr, depth)


def save_prob(path, prob) -> None:
    save_pfm(path, as_prob(prob))


def load_prob(path):
    if _route(path) == "pfm":
        return as_prob(load_pfm(path), str(path))
    arr, depth = _gray_array(path)
    return as_prob(from_quantized(arr, depth), str(path))


def _save_binary_png(path, mask) -> None:
    m = as_binary(mask)
    Image.fromarray((m * np.uint8(255)), mode="L").save(path, format="PNG")


def _load_binary_png(path, name: str) -> EvalMap:
    arr, depth = _gray_array(path)
    if depth != 8:
        raise UnsupportedFormat(f"{path}: {name} must be an 8-bit raster")
    bad = (arr != 0) & (arr != 255)
    if bad.any():
        idx = tuple(int(i) for i in np.unravel_index(int(np.argmax(bad)), arr.shape))
        raise RangeViolation(f"{path}: {name} value {arr[idx]} at {idx} is neither 0 nor 255")
    return as_binary((arr == 255).astype(np.uint8))


def save_evalmap(path, eval_map) -> None:
    """Binary evaluation map as a {0, 255} 8-bit PNG."""
    _save_binary_png(path, eval_map)


def load_evalmap(path) -> EvalMap:
    return _load_binary_png(path, "evaluation map")


def save_segmask(path, mask) -> None:
    _save_binary_png(path, mask)


def load_segmask(path):
    return _load_binary_png(path, "segmentation mask")


def save_rgb(path, rgb) -> None:
    """RGB frame to 8-bit PNG (values rounded from [0, 1])."""
    from .core import as_rgb

    arr = as_rgb(rgb)
    q = np.rint(arr * 255.0).astype(np.uint8)
    Image.fromarray(q, mode="RGB").save(path, format="PNG")


def load_rgb(path) -> np.ndarray:
    from .core import as_rgb

    img = _open_png(path)
    if img.mode != "RGB":
        if img.mode in ("RGBA", "L", "P"):
            img = img.convert("RGB")
        else:
            raise UnsupportedFormat(f"{path}: mode {img.mode} not convertible to RGB")
    arr = np.asarray(img, dtype=np.float64) / 255.0
    return as_rgb(arr, str(path))
