import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from matteval import core
from matteval.errors import DimensionMismatch, RangeViolation

unit_maps = arrays(
    np.float64,
    array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8),
    elements=st.floats(0.0, 1.0, allow_nan=False),
)


def test_alpha_constructor_copies_and_freezes():
    src = np.array([[0.0, 0.5], [1.0, 0.25]])
    a = core.as_alpha(src)
    src[0, 0] = 0.7
    assert a[0, 0] == 0.0
    assert a.dtype == np.float64
    assert not a.flags.writeable


def test_alpha_rejects_value_above_one_and_reports_first_index():
    with pytest.raises(RangeViolation) as exc:
        core.as_alpha(np.array([[0.1, 0.2], [1.5, 2.0]]), "pred")
    msg = str(exc.value)
    assert "pred" in msg and "(1, 0)" in msg and "1.5" in msg


def test_alpha_rejects_negative_and_nan():
    with pytest.raises(RangeViolation):
        core.as_alpha([[-0.1, 0.0]])
    with pytest.raises(RangeViolation):
        core.as_alpha([[np.nan, 0.0]])


def test_alpha_rejects_non_2d():
    with pytest.raises(DimensionMismatch):
        core.as_alpha([0.1, 0.2])
    with pytest.raises(DimensionMismatch):
        core.as_alpha(np.zeros((2, 2, 3)))
    with pytest.raises(DimensionMismatch):
        core.as_alpha(np.zeros((0, 4)))


@given(unit_maps)
@settings(max_examples=30, deadline=None)
def test_alpha_accepts_any_unit_interval_map(arr):
    out = core.as_alpha(arr)
    assert np.array_equal(out, arr)


def test_prob_shares_the_alpha_contract():
    p = core.as_prob([[0.25, 1.0]])
    assert p.dtype == np.float64
    with pytest.raises(RangeViolation):
        core.as_prob([[1.0001]])


def test_binary_accepts_bool_and_01_ints():
    b = core.as_binary(np.array([[True, False]]))
    assert b.dtype == np.uint8 and b.tolist() == [[1, 0]]
    b2 = core.as_binary([[0, 1], [1, 0]])
    assert b2.dtype == np.uint8
    assert not b2.flags.writeable


def test_binary_rejects_other_values_with_index():
    with pytest.raises(RangeViolation) as exc:
        core.as_binary([[0, 2]], "seg")
    assert "(0, 1)" in str(exc.value)
    with pytest.raises(RangeViolation):
        core.as_binary([[0.5, 0.0]])


def test_rgb_requires_three_channels_in_range():
    ok = core.as_rgb(np.zeros((2, 3, 3)))
    assert ok.shape == (2, 3, 3)
    with pytest.raises(DimensionMismatch):
        core.as_rgb(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        core.as_rgb(np.zeros((2, 3, 4)))
    with pytest.raises(RangeViolation):
        core.as_rgb(np.full((1, 1, 3), 1.5))


@pytest.mark.parametrize("bit_depth", [8, 16])
@given(data=st.data())
@settings(max_examples=25, deadline=None)
def test_quantized_round_trip_is_exact(bit_depth, data):
    peak = (1 << bit_depth) - 1
    raw = data.draw(
        arrays(
            np.uint16,
            array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=6),
            elements=st.integers(0, peak),
        )
    )
    alpha = core.from_quantized(raw, bit_depth)
    back = core.quantize(alpha, bit_depth)
    assert np.array_equal(back.astype(np.int64), raw.astype(np.int64))


def test_from_quantized_maps_endpoints():
    a = core.from_quantized(np.array([[0, 255]]), 8)
    assert a[0, 0] == 0.0 and a[0, 1] == 1.0


def test_from_quantized_rejects_out_of_depth_values():
    with pytest.raises(RangeViolation):
        core.from_quantized(np.array([[256]]), 8)
    with pytest.raises(RangeViolation):
        core.from_quantized(np.array([[-1]]), 8)
    with pytest.raises(ValueError):
        core.from_quantized(np.array([[0]]), 12)


def test_quantize_rounds_to_nearest_level():
    q = core.quantize(np.array([[0.0, 0.5, 1.0]]), 8)
    assert q.tolist() == [[0, 128, 255]]
    assert q.dtype == np.uint8
    q16 = core.quantize(np.array([[1.0]]), 16)
    assert q16[0, 0] == 65535 and q16.dtype == np.uint16


def test_binarize_keeps_strictly_below_threshold_reliable():
    ev = core.binarize_prob(np.array([[0.4999, 0.5, 0.5001]]), 0.5)
    assert ev.tolist() == [[1, 0, 0]]
    assert ev.dtype == np.uint8


def test_binarize_rejects_degenerate_thresholds():
    with pytest.raises(ValueError):
        core.binarize_prob(np.array([[0.5]]), 0.0)
    with pytest.raises(ValueError):
        core.binarize_prob(np.array([[0.5]]), 1.0)


def test_validate_pair_checks_shapes_then_ranges():
    core.validate_pair(np.zeros((2, 2)), np.ones((2, 2), dtype=np.uint8))
    with pytest.raises(DimensionMismatch):
        core.validate_pair(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(RangeViolation):
        core.validate_pair(np.full((2, 2), 1.5), np.zeros((2, 2)))
    with pytest.raises(RangeViolation):
        core.validate_pair(np.zeros((2, 2)), np.full((2, 2), 3, dtype=np.uint8))
