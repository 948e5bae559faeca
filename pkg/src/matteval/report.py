"""Run reports: one JSON document per CLI invocation.

Reports carry the tool name, the fully merged configuration (so every
effective constant is auditable), per-frame records, aggregate means
recomputed from those records, skipped frames and warnings. Keys are
written sorted so identical content yields identical bytes.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import jsonschema

from .errors import SchemaViolation


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def recompute_aggregates(records: Sequence[dict]) -> dict:
    """Mean of every numeric field present in all records, recursing one
    level into nested dicts (e.g. nonref.err). Non-numeric and partially
    present fields are skipped; frame_id never aggregates."""
    if not records:
        return {}
    out: dict = {}
    keys = set(records[0]).intersection(*(set(r) for r in records))
    for key in sorted(keys):
        if key == "frame_id":
            continue
        values = [r[key] for r in records]
        if all(_is_number(v) for v in values):
            out[f"mean_{key}"] = sum(values) / len(values)
        elif all(isinstance(v, dict) for v in values):
            inner_keys = set(values[0]).intersection(*(set(v) for v in values))
            inner = {}
            for ik in sorted(inner_keys):
                ivals = [v[ik] for v in values]
                if all(_is_number(x) for x in ivals):
                    inner[f"mean_{ik}"] = sum(ivals) / len(ivals)
            if inner:
                out[key] = inner
    return out


def build_report(
    tool: str,
    config: dict,
    frames: Sequence[dict],
    skipped: Sequence[dict] = (),
    warnings: Sequence[str] = (),
    extra: Optional[dict] = None,
    timestamps: bool = True,
) -> dict:
    from . import __version__

    report = {
        "tool": tool,
        "version": __version__,
        "config": dict(config),
        "frames": list(frames),
        "aggregates": recompute_aggregates(frames),
        "skipped": list(skipped),
        "warnings": list(warnings),
    }
    if extra:
        report["summary"] = dict(extra)
    if timestamps:
        report["generated_at"] = datetime.now(timezone.utc).isoformat()
    return report


def write_report(path, report: dict) -> None:
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True)
    Path(path).write_text(text + "\n")


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def validate_report(report: dict) -> None:
    schema = json.loads(resources.files("matteval").joinpath("schemas/report.schema.json").read_text())
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(report), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        pointer = "/" + "/".join(str(p) for p in first.absolute_path)
        raise SchemaViolation(f"{pointer}: {first.message}")
