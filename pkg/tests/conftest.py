"""Shared test fixtures: deterministic synthetic sequences on disk in the
manifest layout the CLI consumes, plus an in-process CLI runner."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from matteval import cli, imgio
from matteval.evalmap import make_patch_grid


def soft_disk(height: int, width: int, center_row: float, center_col: float, radius: float) -> np.ndarray:
    """Alpha-like blob: 1 inside, soft anti-aliased rim, 0 outside."""
    yy, xx = np.mgrid[0:height, 0:width]
    dist = np.sqrt((yy - center_row) ** 2.0 + (xx - center_col) ** 2.0)
    return np.clip(1.5 - dist / radius, 0.0, 1.0)


def shift_half(values: np.ndarray) -> np.ndarray:
    """Wrap values by one half: every pixel moves by exactly about 0.5."""
    return np.mod(values + 0.5, 1.0)


def corrupt_cells(base: np.ndarray, grid, cells) -> np.ndarray:
    out = np.array(base)
    for r, c in cells:
        top, left, h, w = grid.cell_bounds(r, c)
        out[top : top + h, left : left + w] = shift_half(out[top : top + h, left : left + w])
    return out


def write_sequence(
    root: Path,
    n_frames: int = 5,
    height: int = 56,
    width: int = 56,
    grid_rows: int = 7,
    grid_cols: int = 7,
    corrupt: int = 3,
    with_seg: bool = True,
    seed: int = 1234,
) -> Path:
    """Build a small dual-branch sequence with ground truth.

    Per frame: a moving soft disk as the true matte; each branch copies it
    except in `corrupt` randomly chosen (disjoint between branches) grid
    cells where the values are wrapped by one half. Returns the manifest
    path; all file paths inside are relative to the manifest directory.
    """
    root.mkdir(parents=True, exist_ok=True)
    grid = make_patch_grid(height, width, grid_rows, grid_cols)
    all_cells = [(r, c) for r in range(grid_rows) for c in range(grid_cols)]
    frames = []
    for t in range(n_frames):
        rng = np.random.default_rng(seed + t)
        gt = soft_disk(height, width, height / 2.0 + 2.0 * t - 4.0, width / 2.0 - t + 2.0, min(height, width) / 3.0)
        picked = rng.permutation(len(all_cells))[: 2 * corrupt]
        alpha_v = corrupt_cells(gt, grid, [all_cells[i] for i in picked[:corrupt]])
        alpha_i = corrupt_cells(gt, grid, [all_cells[i] for i in picked[corrupt:]])
        fid = f"frame_{t:03d}"
        imgio.save_rgb(root / f"{fid}_rgb.png", np.stack([gt, 1.0 - gt, np.full_like(gt, 0.5)], axis=-1))
        imgio.save_alpha(root / f"{fid}_gt.pfm", gt)
        imgio.save_alpha(root / f"{fid}_v.pfm", alpha_v)
        imgio.save_alpha(root / f"{fid}_i.pfm", alpha_i)
        record = {
            "frame_id": fid,
            "rgb_path": f"{fid}_rgb.png",
            "alpha_v_path": f"{fid}_v.pfm",
            "alpha_i_path": f"{fid}_i.pfm",
            "gt_path": f"{fid}_gt.pfm",
        }
        if with_seg:
            imgio.save_segmask(root / f"{fid}_seg.png", (gt >= 0.5).astype(np.uint8))
            record["seg_path"] = f"{fid}_seg.png"
        frames.append(record)
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps({"version": 1, "frames": frames}, indent=2))
    return manifest_path


def run_cli(*argv) -> int:
    return cli.main([str(a) for a in argv])


@pytest.fixture()
def sequence_manifest(tmp_path) -> Path:
    return write_sequence(tmp_path / "seq")
