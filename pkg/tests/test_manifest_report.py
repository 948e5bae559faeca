import json

import pytest

from matteval import report
from matteval.errors import DuplicateFrameId, SchemaViolation
from matteval.manifest import load_manifest


def _write(tmp_path, doc, name="manifest.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def _minimal(frames=None, **top):
    doc = {"version": 1, "frames": frames if frames is not None else []}
    doc.update(top)
    return doc


# --- manifest loading -------------------------------------------------------------


def test_minimal_manifest_loads(tmp_path):
    path = _write(tmp_path, _minimal([{"frame_id": "f0", "rgb_path": "f0.png"}]))
    m = load_manifest(path)
    assert m.version == 1
    assert len(m) == 1
    assert m.frames[0].frame_id == "f0"
    assert m.frames[0].alpha_v_path is None
    assert m.base_dir == tmp_path.resolve()
    assert m.load_warnings == ()


def test_relative_paths_resolve_against_the_manifest_directory(tmp_path):
    nested = tmp_path / "data"
    nested.mkdir()
    frame = {"frame_id": "f0", "rgb_path": "imgs/f0.png", "gt_path": "/abs/gt.pfm"}
    path = _write(nested, _minimal([frame]))
    m = load_manifest(path)
    assert m.frames[0].rgb_path == nested.resolve() / "imgs" / "f0.png"
    assert str(m.frames[0].gt_path) == "/abs/gt.pfm"


def test_mask_paths_and_boxes_path_resolve(tmp_path):
    frame = {"frame_id": "f0", "rgb_path": "f0.png", "mask_paths": ["m0.png", "m1.png"]}
    path = _write(tmp_path, _minimal([frame], boxes_path="boxes.jsonl"))
    m = load_manifest(path)
    assert [p.name for p in m.frames[0].mask_paths] == ["m0.png", "m1.png"]
    assert m.boxes_path == tmp_path.resolve() / "boxes.jsonl"


def test_defaults_section_survives_with_known_keys_only(tmp_path):
    doc = _minimal(
        [{"frame_id": "f0", "rgb_path": "f0.png"}],
        defaults={"delta": 0.3, "grid_rows": 5},
    )
    m = load_manifest(_write(tmp_path, doc))
    assert m.defaults == {"delta": 0.3, "grid_rows": 5}


def test_unknown_keys_warn_but_do_not_fail(tmp_path):
    doc = _minimal([{"frame_id": "f0", "rgb_path": "f0.png", "exposure": 1.5}], camera="gopro")
    doc["defaults"] = {"delta": 0.25, "shutter": 8}
    path = _write(tmp_path, doc)
    with pytest.warns(UserWarning) as caught:
        m = load_manifest(path)
    texts = sorted(str(w.message) for w in caught)
    assert any("'camera'" in t for t in texts)
    assert any("'exposure'" in t for t in texts)
    assert any("'shutter'" in t for t in texts)
    assert len(m.load_warnings) == 3
    assert m.defaults == {"delta": 0.25}


@pytest.mark.parametrize(
    "doc, pointer",
    [
        ({"frames": []}, "/"),
        ({"version": 1}, "/"),
        ({"version": "one", "frames": []}, "/version"),
        ({"version": 1, "frames": [{"rgb_path": "x.png"}]}, "/frames/0"),
        ({"version": 1, "frames": [{"frame_id": "f0"}]}, "/frames/0"),
        ({"version": 1, "frames": [{"frame_id": 5, "rgb_path": "x.png"}]}, "/frames/0/frame_id"),
        ({"version": 1, "frames": [], "defaults": {"delta": "big"}}, "/defaults/delta"),
    ],
)
def test_schema_errors_carry_json_pointers(tmp_path, doc, pointer):
    path = _write(tmp_path, doc)
    with pytest.raises(SchemaViolation) as excinfo:
        load_manifest(path)
    assert str(excinfo.value).startswith(pointer)


def test_duplicate_and_unsorted_frame_ids_are_rejected(tmp_path):
    dup = _minimal(
        [
            {"frame_id": "f0", "rgb_path": "a.png"},
            {"frame_id": "f0", "rgb_path": "b.png"},
        ]
    )
    with pytest.raises(DuplicateFrameId):
        load_manifest(_write(tmp_path, dup))
    unsorted = _minimal(
        [
            {"frame_id": "f1", "rgb_path": "a.png"},
            {"frame_id": "f0", "rgb_path": "b.png"},
        ]
    )
    with pytest.raises(SchemaViolation, match="sorted"):
        load_manifest(_write(tmp_path, unsorted, name="m2.json"))


def test_unreadable_manifest_reports_the_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaViolation, match="not readable JSON"):
        load_manifest(path)
    with pytest.raises(FileNotFoundError):
        load_manifest(tmp_path / "absent.json")


# --- aggregates ---------------------------------------------------------------------


def test_aggregates_average_common_numeric_fields():
    records = [
        {"frame_id": "a", "mad": 2.0, "extra": 1.0},
        {"frame_id": "b", "mad": 4.0},
    ]
    out = report.recompute_aggregates(records)
    assert out == {"mean_mad": 3.0}  # `extra` is not present everywhere


def test_aggregates_recurse_one_level_into_dicts():
    records = [
        {"frame_id": "a", "nonref": {"err": 1.0, "mer": 2.0, "note": "x"}},
        {"frame_id": "b", "nonref": {"err": 3.0, "mer": 4.0, "note": "y"}},
    ]
    out = report.recompute_aggregates(records)
    assert out == {"nonref": {"mean_err": 2.0, "mean_mer": 3.0}}


def test_aggregates_skip_bools_strings_and_empty_input():
    assert report.recompute_aggregates([]) == {}
    records = [{"ok": True, "name": "x", "n": 1}, {"ok": False, "name": "y", "n": 3}]
    assert report.recompute_aggregates(records) == {"mean_n": 2.0}


# --- report documents -----------------------------------------------------------------


def _sample_report(timestamps=False):
    return report.build_report(
        tool="evaluate",
        config={"delta": 0.2, "grid_rows": 7},
        frames=[{"frame_id": "f0", "mad": 1.5}, {"frame_id": "f1", "mad": 2.5}],
        skipped=[{"frame_id": "f2", "reason": "missing gt"}],
        warnings=["something minor"],
        extra={"dtssd": 0.5},
        timestamps=timestamps,
    )


def test_report_aggregates_match_recomputation():
    doc = _sample_report()
    assert doc["aggregates"] == report.recompute_aggregates(doc["frames"])
    assert doc["aggregates"]["mean_mad"] == 2.0
    assert doc["summary"] == {"dtssd": 0.5}
    assert "generated_at" not in doc
    assert "generated_at" in _sample_report(timestamps=True)


def test_report_round_trip_is_byte_stable(tmp_path):
    doc = _sample_report()
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    report.write_report(p1, doc)
    report.write_report(p2, report.load_report(p1))
    assert p1.read_bytes() == p2.read_bytes()
    text = p1.read_text()
    assert text.endswith("\n")
    keys = list(report.load_report(p1))
    assert keys == sorted(keys)


def test_report_schema_validation_accepts_and_rejects():
    doc = _sample_report(timestamps=True)
    report.validate_report(doc)
    bad = dict(doc)
    del bad["config"]
    with pytest.raises(SchemaViolation, match="config"):
        report.validate_report(bad)
    worse = dict(doc)
    worse["frames"] = "nope"
    with pytest.raises(SchemaViolation, match="/frames"):
        report.validate_report(worse)
