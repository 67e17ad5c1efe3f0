import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cei.aggregate import rank_by_score, rank_columns, weighted_cei
from cei.errors import DataError
from cei.model import DataMatrix, ValueKind, WeightVector, bundled_cei2012_weights


def _scores(rows, kind=ValueKind.SCORE_60_100, cols=None):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    cols = cols or tuple(f"i{j}" for j in range(rows.shape[1]))
    return DataMatrix(tuple(f"c{i}" for i in range(rows.shape[0])), cols, rows, kind)


def test_constant_scores():
    m = _scores([[70.0] * 7], cols=bundled_cei2012_weights().ids)
    assert weighted_cei(m, bundled_cei2012_weights()).overall[0] == pytest.approx(70, abs=1e-12)


def test_two_index_examples():
    m = _scores([[60.0, 100.0]])
    assert weighted_cei(m, WeightVector((("i0", 0.5), ("i1", 0.5)))).overall[0] == 80
    assert weighted_cei(m, {"i0": 2, "i1": 2}).overall[0] == 80


def test_mismatch_lists_ids():
    m = _scores([[60.0, 100.0]])
    with pytest.raises(DataError, match="i1") as exc:
        weighted_cei(m, {"i0": 1.0, "zz": 1.0})
    assert "zz" in str(exc.value)


def test_rejects_raw():
    with pytest.raises(DataError):
        weighted_cei(_scores([[1.0]], ValueKind.RAW), {"i0": 1.0})


def test_rank_examples():
    assert rank_by_score([90, 80, 70]).ranks.tolist() == [1, 2, 3]
    assert rank_by_score([80, 80]).ranks.tolist() == [1.5, 1.5]
    assert rank_by_score([70, 90, 90, 50]).ranks.tolist() == [3, 1.5, 1.5, 4]


def brute_average_ranks(values):
    # rank = 1 + (#strictly greater) + (#ties - 1) / 2
    v = list(values)
    return [1 + sum(o > x for o in v) + (sum(o == x for o in v) - 1) / 2 for x in v]


@given(st.lists(st.integers(0, 20), min_size=1, max_size=40))
def test_rank_matches_brute_force(values):
    r = rank_by_score(values).ranks
    assert r.tolist() == brute_average_ranks(values)
    n = len(values)
    assert r.sum() == n * (n + 1) / 2


@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=30))
def test_rank_invariant_under_monotone_map(v):
    v = np.array(v, dtype=float)
    # exact in float64 for these magnitudes, so strictly increasing
    np.testing.assert_array_equal(rank_by_score(v).ranks, rank_by_score(v**3 + 5 * v - 7).ranks)


def test_rank_columns():
    m = _scores([[60, 70], [80, 70], [100, 65]], ValueKind.SCORE_60_100)
    r = rank_columns(m)
    assert r.value_kind is ValueKind.RANK
    assert r.values.tolist() == [[3, 1.5], [2, 1.5], [1, 3]]


@given(
    arrays(np.float64, st.tuples(st.integers(1, 10), st.integers(1, 8)), elements=st.floats(0, 100)),
    st.data(),
)
def test_convex_bounds_and_scale_invariance(values, data):
    k = values.shape[1]
    w = data.draw(arrays(np.float64, k, elements=st.floats(0.01, 10)))
    c = data.draw(st.floats(0.001, 1000))
    m = _scores(values, ValueKind.SCORE_0_100)
    wmap = dict(zip(m.col_labels, w))
    out = weighted_cei(m, wmap).overall
    scaled = weighted_cei(m, {k_: c * v for k_, v in wmap.items()}).overall
    np.testing.assert_allclose(scaled, out, rtol=0, atol=1e-12)
    assert np.all(out >= values.min(axis=1) - 1e-12)
    assert np.all(out <= values.max(axis=1) + 1e-12)
