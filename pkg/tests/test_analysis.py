import csv
import math

import numpy as np
import pytest

import oracles
from matteval import analysis
from matteval.errors import DimensionMismatch, RangeViolation
from matteval.evalmap import broadcast_cells, make_patch_grid


def _grid(h=8, w=8, rows=2, cols=2):
    return make_patch_grid(h, w, rows, cols)


# --- pair collection ------------------------------------------------------------


def test_pairs_are_cell_means_against_scores():
    grid = _grid()
    prob = np.zeros((8, 8))
    prob[:4, :4] = 0.5
    prob[4:, 4:] = 1.0
    scores = np.array([[0.1, 0.2], [0.3, 0.4]])
    pairs = analysis.collect_pairs([prob], [scores], grid)
    assert pairs == [(0.1, 0.5), (0.2, 0.0), (0.3, 0.0), (0.4, 1.0)]


def test_pair_count_is_frames_times_cells():
    grid = _grid()
    prob = np.full((8, 8), 0.25)
    scores = np.full((2, 2), 0.5)
    pairs = analysis.collect_pairs([prob] * 3, [scores] * 3, grid)
    assert len(pairs) == 3 * 4


def test_pair_collection_validates_inputs():
    grid = _grid()
    good_prob = np.zeros((8, 8))
    good_scores = np.zeros((2, 2))
    with pytest.raises(DimensionMismatch):
        analysis.collect_pairs([good_prob], [good_scores, good_scores], grid)
    with pytest.raises(DimensionMismatch):
        analysis.collect_pairs([np.zeros((4, 8))], [good_scores], grid)
    with pytest.raises(DimensionMismatch):
        analysis.collect_pairs([good_prob], [np.zeros((3, 2))], grid)
    with pytest.raises(ValueError):
        analysis.collect_pairs([good_prob], [good_scores - 0.5], grid)
    with pytest.raises(RangeViolation):
        analysis.collect_pairs([good_prob + 2.0], [good_scores], grid)


# --- binning ----------------------------------------------------------------------


def test_bin_membership_is_left_closed_right_open():
    out = analysis.bin_and_correlate([(0.5, 0.1), (0.49, 0.2)], n_bins=2)
    assert out.bins[0].count == 1  # 0.49 lands in [0, 0.5)
    assert out.bins[1].count == 1  # 0.5 lands in [0.5, 1]
    assert out.bins[0].lower == 0.0 and out.bins[0].upper == 0.5


def test_last_bin_keeps_the_right_endpoint():
    out = analysis.bin_and_correlate([(1.0, 0.3), (0.0, 0.6)], n_bins=4)
    assert out.bins[-1].count == 1
    assert out.bins[0].count == 1


def test_bin_counts_sum_to_the_pair_count():
    rng = np.random.default_rng(0)
    pairs = [(float(a), float(b)) for a, b in rng.random((257, 2))]
    out = analysis.bin_and_correlate(pairs)
    assert len(out.bins) == 30
    assert sum(b.count for b in out.bins) == out.total_pairs == 257


def test_bin_stats_follow_membership_rules():
    pairs = [(0.02, 0.3), (0.01, 0.5), (0.99, 0.7)]
    out = analysis.bin_and_correlate(pairs, n_bins=10)
    first = out.bins[0]
    assert first.count == 2
    assert first.mean_pred == pytest.approx(0.4)
    assert first.std_pred == pytest.approx(np.std([0.3, 0.5], ddof=1))
    last = out.bins[-1]
    assert last.count == 1 and last.mean_pred == 0.7 and last.std_pred is None
    empty = out.bins[4]
    assert empty.count == 0 and empty.mean_pred is None and empty.std_pred is None


# --- correlation --------------------------------------------------------------------


def test_self_correlation_is_exactly_one():
    rng = np.random.default_rng(1)
    values = rng.random(200)
    pairs = [(float(v), float(v)) for v in values]
    out = analysis.bin_and_correlate(pairs)
    assert out.pearson_r == 1.0
    assert out.degenerate_reason is None


def test_correlation_matches_the_textbook_oracle():
    rng = np.random.default_rng(2)
    x = rng.random(123)
    y = np.clip(0.1 + 2.0 * x * 0.4 + 0.05 * rng.random(123), 0.0, 1.0)
    pairs = list(zip(x.tolist(), y.tolist()))
    out = analysis.bin_and_correlate(pairs)
    assert out.pearson_r == pytest.approx(oracles.pearson_oracle(x, y), abs=1e-12)


def test_affine_relation_scores_r_of_one():
    x = np.linspace(0.0, 0.4, 50)
    y = 2.0 * x + 0.1
    out = analysis.bin_and_correlate(list(zip(x.tolist(), y.tolist())))
    assert out.pearson_r == pytest.approx(1.0, abs=1e-12)


def test_degenerate_variance_yields_null_r_with_a_reason():
    out = analysis.bin_and_correlate([(0.5, 0.1), (0.5, 0.9)])
    assert out.pearson_r is None
    assert out.degenerate_reason == "zero variance on at least one axis"
    flat = analysis.bin_and_correlate([(0.1, 0.5), (0.9, 0.5)])
    assert flat.pearson_r is None


def test_a_single_pair_is_reported_not_correlated():
    out = analysis.bin_and_correlate([(0.3, 0.6)])
    assert out.pearson_r is None
    assert out.degenerate_reason == "fewer than two pairs"
    assert out.total_pairs == 1


def test_analysis_input_validation():
    with pytest.raises(ValueError):
        analysis.bin_and_correlate([])
    with pytest.raises(ValueError):
        analysis.bin_and_correlate([(0.5, 1.5)])
    with pytest.raises(ValueError):
        analysis.bin_and_correlate([(0.5, 0.5)], n_bins=0)


def test_r_is_clipped_into_the_valid_interval():
    out = analysis.bin_and_correlate([(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)])
    assert -1.0 <= out.pearson_r <= 1.0


# --- oracle-fed end-to-end identity ---------------------------------------------------


def test_feeding_the_oracle_its_own_discrepancies_gives_perfect_correlation():
    from matteval.evalmap import normalize_minmax, patch_discrepancy

    rng = np.random.default_rng(3)
    grid = make_patch_grid(56, 56, 7, 7)
    probs, scores = [], []
    for _ in range(4):
        gt = rng.random((56, 56))
        pred = np.clip(gt + 0.3 * (rng.random((56, 56)) - 0.5), 0.0, 1.0)
        s = normalize_minmax(patch_discrepancy(pred, gt, grid))
        probs.append(broadcast_cells(grid, s))
        scores.append(s)
    pairs = analysis.collect_pairs(probs, scores, grid)
    out = analysis.bin_and_correlate(pairs)
    assert out.pearson_r == 1.0


# --- CSV export ------------------------------------------------------------------------


def test_plot_csv_round_trips_through_repr(tmp_path):
    pairs = [(0.02, 0.3), (0.01, 0.5), (0.99, 0.7)]
    out = analysis.bin_and_correlate(pairs, n_bins=3)
    path = tmp_path / "bins.csv"
    analysis.write_plot_csv(out, path)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["bin_lower", "bin_upper", "mean_pred", "std_pred", "count"]
    assert len(rows) == 1 + 3
    assert float(rows[1][0]) == out.bins[0].lower
    assert float(rows[1][2]) == out.bins[0].mean_pred
    assert rows[2][2] == "" and rows[2][3] == ""  # the empty middle bin
    assert rows[3][3] == ""  # single member: no sample std
    assert [int(r[4]) for r in rows[1:]] == [2, 0, 1]


def test_to_dict_mirrors_the_dataclass():
    out = analysis.bin_and_correlate([(0.1, 0.2), (0.9, 0.8)], n_bins=2)
    d = out.to_dict()
    assert d["total_pairs"] == 2
    assert d["pearson_r"] == out.pearson_r
    assert d["degenerate_reason"] is None
    assert len(d["bins"]) == 2
    assert d["bins"][0]["count"] == 1
    assert math.isclose(d["bins"][0]["lower"], 0.0)
