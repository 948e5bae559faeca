"""Mask-set curation and the dual-branch annotation pipeline.

Curation mirrors a segmentation-dataset cleanup flow: drop masks that are
almost entirely covered by another mask, group the survivors into person
instances using externally supplied detector boxes, and merge each group
into a single mask. The orchestrator runs both matting branches through an
evaluator, fuses them frame by frame, and writes outputs plus a summary.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import defaults
from .core import as_binary, binarize_prob
from .errors import DimensionMismatch, EmptyRegion, SchemaViolation
from .evalmap import EvaluatorPlugin, FrameBundle, nonref_metrics
from .fusion import FusionResult, fuse_frame

log = logging.getLogger("matteval.curation")

_SOURCES = ("manual", "automatic")


@dataclass(frozen=True)
class MaskEntry:
    mask_id: str
    mask: np.ndarray  # binary uint8
    source: str = "manual"

    def __post_init__(self):
        object.__setattr__(self, "mask", as_binary(self.mask, f"mask {self.mask_id}"))
        if self.source not in _SOURCES:
            raise ValueError(f"source must be one of {_SOURCES}, got {self.source!r}")

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True)
class MaskSet:
    entries: tuple

    def __post_init__(self):
        shapes = {e.mask.shape for e in self.entries}
        if len(shapes) > 1:
            raise DimensionMismatch(f"masks disagree on dimensions: {sorted(shapes)}")
        ids = [e.mask_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("mask identifiers must be unique")

    def __len__(self):
        return len(self.entries)

    def ids(self) -> list:
        return [e.mask_id for e in self.entries]


def coverage_ratio(m_i, m_j) -> float:
    """Fraction of m_i lying inside m_j: |i AND j| / |i|.

    Asymmetric on purpose; a small mask inside a big one scores 1.0 while
    the big one scores low. Not an IoU even though it plays that role.
    """
    a = as_binary(m_i, "m_i")
    b = as_binary(m_j, "m_j")
    if a.shape != b.shape:
        raise DimensionMismatch(f"m_i {a.shape} vs m_j {b.shape}")
    area = int(np.count_nonzero(a))
    if area == 0:
        raise EmptyRegion("m_i has no foreground pixels")
    inter = int(np.count_nonzero(a & b))
    return inter / area


def _scan_order(entries) -> list:
    return sorted(entries, key=lambda e: (-e.area, e.mask_id))


def remove_redundant(mask_set: MaskSet, threshold: float = defaults.COVERAGE_THRESHOLD) -> MaskSet:
    """Drop masks almost entirely covered by a surviving mask.

    Scans in descending-area order (ties by identifier) and keeps a mask
    only if no already-kept mask covers more than `threshold` of it, then
    repeats until nothing changes. When two masks mutually cover each
    other, the scan order makes the larger one survive. Zero-area masks are
    dropped up front (they carry no pixels and have no defined coverage).
    """
    if len(mask_set) == 0:
        raise ValueError("mask set is empty")
    current = [e for e in mask_set.entries if e.area > 0]
    while True:
        kept: list = []
        removed = False
        for entry in _scan_order(current):
            covered = any(
                coverage_ratio(entry.mask, other.mask) > threshold for other in kept
            )
            if covered:
                removed = True
            else:
                kept.append(entry)
        current = kept
        if not removed:
            break
    order = {e.mask_id: i for i, e in enumerate(mask_set.entries)}
    current.sort(key=lambda e: order[e.mask_id])
    return MaskSet(entries=tuple(current))


@dataclass(frozen=True)
class Box:
    """Axis-aligned detector rectangle in pixel units."""

    box_id: str
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box {self.box_id}: sides must be >= 1, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box {self.box_id}: origin must be >= 0")


def load_instance_boxes(path) -> Dict[str, List[Box]]:
    """Read detector boxes from a JSON-lines file.

    One record per frame: {"frame_id": ..., "boxes": [{"id", "x", "y",
    "w", "h"}, ...]}. Returns a frame_id -> boxes dict.
    """
    out: Dict[str, List[Box]] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"/line/{lineno}: not valid JSON ({exc})") from exc
        if not isinstance(rec, dict) or "frame_id" not in rec or "boxes" not in rec:
            raise SchemaViolation(f"/line/{lineno}: need frame_id and boxes fields")
        frame_id = str(rec["frame_id"])
        if frame_id in out:
            raise SchemaViolation(f"/line/{lineno}/frame_id: duplicate {frame_id!r}")
        boxes = []
        for k, b in enumerate(rec["boxes"]):
            try:
                boxes.append(Box(box_id=str(b["id"]), x=int(b["x"]), y=int(b["y"]), w=int(b["w"]), h=int(b["h"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaViolation(f"/line/{lineno}/boxes/{k}: {exc}") from exc
        out[frame_id] = boxes
    return out


def _fraction_in_box(mask: np.ndarray, box: Box) -> float:
    h, w = mask.shape
    top = min(max(box.y, 0), h)
    left = min(max(box.x, 0), w)
    bottom = min(box.y + box.h, h)
    right = min(box.x + box.w, w)
    if bottom <= top or right <= left:
        return 0.0
    inside = int(np.count_nonzero(mask[top:bottom, left:right]))
    return inside / int(np.count_nonzero(mask))


def group_to_instances(
    mask_set: MaskSet,
    boxes: List[Box],
    assign_threshold: float = defaults.ASSIGN_THRESHOLD,
    min_area_fraction: float = defaults.MIN_AREA_FRACTION,
) -> Tuple[Dict[str, np.ndarray], List[str]]:
    """Assign masks to detector boxes and merge per instance.

    Each mask goes to the box covering the largest fraction of its area,
    provided that fraction reaches assign_threshold; ties break by box id.
    Per-box masks merge by pixelwise OR. Masks matching no box are
    discarded (treated as non-person), as are whole instances whose merged
    area is below min_area_fraction of their box area (fragment filter).
    Boxes are clipped to the image. Returns (instance_id -> merged mask,
    discarded mask ids).
    """
    assigned: Dict[str, list] = {}
    discarded: List[str] = []
    for entry in mask_set.entries:
        if entry.area == 0:
            discarded.append(entry.mask_id)
            continue
        best: Optional[Box] = None
        best_frac = 0.0
        for box in sorted(boxes, key=lambda b: b.box_id):
            frac = _fraction_in_box(entry.mask, box)
            if frac > best_frac:
                best, best_frac = box, frac
        if best is None or best_frac < assign_threshold:
            discarded.append(entry.mask_id)
        else:
            assigned.setdefault(best.box_id, []).append(entry)

    instances: Dict[str, np.ndarray] = {}
    box_by_id = {b.box_id: b for b in boxes}
    for box_id in sorted(assigned):
        members = assigned[box_id]
        merged = members[0].mask.copy()
        for m in members[1:]:
            merged |= m.mask
        box = box_by_id[box_id]
        if int(np.count_nonzero(merged)) < min_area_fraction * box.w * box.h:
            discarded.extend(m.mask_id for m in members)
            continue
        instances[box_id] = as_binary(merged)
    return instances, discarded


@dataclass
class DualBranchConfig:
    """Knobs for the fusion pipeline; defaults match the package constants."""

    binarize_threshold: float = defaults.BINARIZE_THRESHOLD
    blur_kernel: int = defaults.BLUR_KERNEL
    blur_sigma: float = defaults.BLUR_SIGMA
    band_width: int = defaults.BAND_WIDTH
    out_dir: Optional[Path] = None  # None: keep results in memory only


@dataclass
class FrameOutcome:
    frame_id: str
    result: Optional[FusionResult]
    record: dict
    error: Optional[str] = None


def fuse_one_frame(
    frame_id: str,
    alpha_v,
    alpha_i,
    evaluator: EvaluatorPlugin,
    config: DualBranchConfig,
    rgb=None,
    seg=None,
    gt=None,
    prob_v_path=None,
    prob_i_path=None,
) -> FrameOutcome:
    """Evaluate both branches, binarize, fuse; pure apart from the evaluator."""
    bundle_v = FrameBundle(frame_id=frame_id, branch="v", alpha=alpha_v, rgb=rgb, seg=seg, gt=gt, prob_path=prob_v_path)
    bundle_i = FrameBundle(frame_id=frame_id, branch="i", alpha=alpha_i, rgb=rgb, seg=seg, gt=gt, prob_path=prob_i_path)
    prob_v = evaluator(bundle_v)
    prob_i = evaluator(bundle_i)
    eval_v = binarize_prob(prob_v, config.binarize_threshold)
    eval_i = binarize_prob(prob_i, config.binarize_threshold)
    result = fuse_frame(alpha_v, alpha_i, eval_v, eval_i, config.blur_kernel, config.blur_sigma)

    record: dict = {
        "frame_id": frame_id,
        "image_fraction": result.image_fraction,
        "mask_mean": result.mask_mean,
        "reliable_fraction": float(np.count_nonzero(result.eval_map)) / result.eval_map.size,
    }
    if seg is not None:
        nr = nonref_metrics(result.eval_map, seg, config.band_width)
        record["nonref"] = {"err": nr.err, "mer": nr.mer, "ber": nr.ber}
        if nr.warnings:
            record["warnings"] = list(nr.warnings)
    return FrameOutcome(frame_id=frame_id, result=result, record=record)


def run_dual_branch(manifest, evaluator: EvaluatorPlugin, config: DualBranchConfig) -> dict:
    """Fuse every frame of a manifest; returns the summary dict.

    Frames whose inputs are missing or invalid are skipped and logged; the
    summary's `skipped` list is how callers decide on a partial-failure
    exit. Output files (fused matte as float map, merged evaluation map as
    a binary raster, soft mask as float map) land in config.out_dir when
    set, named by frame_id.
    """
    from .imgio import load_alpha, load_rgb, load_segmask, save_alpha, save_evalmap

    records = []
    skipped = []
    for frame in manifest.frames:
        fid = frame.frame_id
        try:
            if frame.alpha_v_path is None or frame.alpha_i_path is None:
                raise FileNotFoundError("frame needs both alpha_v_path and alpha_i_path")
            alpha_v = load_alpha(frame.alpha_v_path)
            alpha_i = load_alpha(frame.alpha_i_path)
            rgb = load_rgb(frame.rgb_path) if frame.rgb_path else None
            seg = load_segmask(frame.seg_path) if frame.seg_path else None
            gt = load_alpha(frame.gt_path) if frame.gt_path else None
            outcome = fuse_one_frame(
                fid, alpha_v, alpha_i, evaluator, config,
                rgb=rgb, seg=seg, gt=gt,
                prob_v_path=frame.prob_v_path, prob_i_path=frame.prob_i_path,
            )
        except Exception as exc:  # noqa: BLE001 - per-frame isolation is the contract
            log.error("frame %s skipped: %s", fid, exc)
            skipped.append({"frame_id": fid, "reason": str(exc)})
            continue

        if config.out_dir is not None:
            out = Path(config.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            save_alpha(out / f"{fid}_fused.pfm", outcome.result.alpha)
            save_evalmap(out / f"{fid}_eval.png", outcome.result.eval_map)
            save_alpha(out / f"{fid}_mask.pfm", outcome.result.mask)
            outcome.record["outputs"] = {
                "fused": f"{fid}_fused.pfm",
                "eval": f"{fid}_eval.png",
                "mask": f"{fid}_mask.pfm",
            }
        records.append(outcome.record)

    summary = {
        "frames": records,
        "skipped": skipped,
        "frame_count": len(records),
    }
    if records:
        summary["mean_image_fraction"] = float(np.mean([r["image_fraction"] for r in records]))
        nonrefs = [r["nonref"] for r in records if "nonref" in r]
        if nonrefs:
            summary["mean_nonref"] = {
                k: float(np.mean([n[k] for n in nonrefs])) for k in ("err", "mer", "ber")
            }
    return summary
