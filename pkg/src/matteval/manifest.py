"""Sequence manifests: the JSON contract that drives every CLI pipeline.

A manifest lists frames in id order with per-frame file paths, an optional
`defaults` section overriding package constants, and an optional detector
boxes file for mask curation. Relative paths resolve against the manifest's
own directory. Unknown fields are tolerated with a warning so newer
manifests keep working with older tools.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

import jsonschema

from .errors import DuplicateFrameId, SchemaViolation

_FRAME_KEYS = {
    "frame_id",
    "rgb_path",
    "alpha_v_path",
    "alpha_i_path",
    "gt_path",
    "seg_path",
    "prob_v_path",
    "prob_i_path",
    "eval_v_path",
    "eval_i_path",
    "mask_paths",
}
_TOP_KEYS = {"version", "frames", "defaults", "boxes_path"}


def _schema() -> dict:
    text = resources.files("matteval").joinpath("schemas/manifest.schema.json").read_text()
    return json.loads(text)


_DEFAULT_KEYS = set(_schema()["properties"]["defaults"]["properties"])


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    rgb_path: Path
    alpha_v_path: Optional[Path] = None
    alpha_i_path: Optional[Path] = None
    gt_path: Optional[Path] = None
    seg_path: Optional[Path] = None
    prob_v_path: Optional[Path] = None
    prob_i_path: Optional[Path] = None
    eval_v_path: Optional[Path] = None
    eval_i_path: Optional[Path] = None
    mask_paths: Tuple[Path, ...] = ()


@dataclass(frozen=True)
class SequenceManifest:
    version: int
    frames: Tuple[FrameRecord, ...]
    defaults: dict = field(default_factory=dict)
    boxes_path: Optional[Path] = None
    base_dir: Path = Path(".")
    load_warnings: Tuple[str, ...] = ()

    def __len__(self):
        return len(self.frames)


def _pointer(error: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in error.absolute_path)


def load_manifest(path) -> SequenceManifest:
    """Parse and validate a manifest file.

    Raises SchemaViolation (with a JSON pointer to the offending field) on
    structural problems and DuplicateFrameId when two frames share an id.
    frame_ids must already be sorted; an unsorted manifest is rejected
    rather than silently reordered.
    """
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"/: {path} is not readable JSON ({exc})") from exc

    validator = jsonschema.Draft7Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise SchemaViolation(f"{_pointer(first)}: {first.message}")

    warns = []
    for key in doc:
        if key not in _TOP_KEYS:
            warns.append(f"unknown manifest field {key!r} ignored")
    for i, frame in enumerate(doc["frames"]):
        for key in frame:
            if key not in _FRAME_KEYS:
                warns.append(f"unknown field {key!r} in frames[{i}] ignored")
    for key in doc.get("defaults", {}):
        if key not in _DEFAULT_KEYS:
            warns.append(f"unknown defaults key {key!r} ignored")

    ids = [f["frame_id"] for f in doc["frames"]]
    seen = set()
    for fid in ids:
        if fid in seen:
            raise DuplicateFrameId(f"frame_id {fid!r} appears more than once")
        seen.add(fid)
    if ids != sorted(ids):
        raise SchemaViolation("/frames: frame_ids must be sorted ascending")

    base = p.resolve().parent

    def resolve(rel: Optional[str]) -> Optional[Path]:
        if rel is None:
            return None
        q = Path(rel)
        return q if q.is_absolute() else base / q

    frames = []
    for f in doc["frames"]:
        frames.append(
            FrameRecord(
                frame_id=f["frame_id"],
                rgb_path=resolve(f["rgb_path"]),
                alpha_v_path=resolve(f.get("alpha_v_path")),
                alpha_i_path=resolve(f.get("alpha_i_path")),
                gt_path=resolve(f.get("gt_path")),
                seg_path=resolve(f.get("seg_path")),
                prob_v_path=resolve(f.get("prob_v_path")),
                prob_i_path=resolve(f.get("prob_i_path")),
                eval_v_path=resolve(f.get("eval_v_path")),
                eval_i_path=resolve(f.get("eval_i_path")),
                mask_paths=tuple(resolve(m) for m in f.get("mask_paths", [])),
            )
        )

    defaults = {k: v for k, v in doc.get("defaults", {}).items() if k in _DEFAULT_KEYS}
    for w in warns:
        warnings.warn(w, UserWarning, stacklevel=2)
    return SequenceManifest(
        version=int(doc["version"]),
        frames=tuple(frames),
        defaults=defaults,
        boxes_path=resolve(doc.get("boxes_path")),
        base_dir=base,
        load_warnings=tuple(warns),
    )
