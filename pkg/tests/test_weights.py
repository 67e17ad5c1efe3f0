import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cei.errors import DataError
from cei.weights import PairwiseMatrix, ahp_weights, random_index


def test_uniform_matrix():
    r = ahp_weights(PairwiseMatrix(("a", "b", "c"), np.ones((3, 3))))
    assert [w for _, w in r.weights.entries] == pytest.approx([1 / 3] * 3, abs=1e-12)
    assert r.lambda_max == pytest.approx(3, abs=1e-12)
    assert r.consistency_ratio == pytest.approx(0, abs=1e-12)
    assert not r.inconsistent


def test_two_by_two():
    r = ahp_weights(PairwiseMatrix(("a", "b"), [[1, 3], [1 / 3, 1]]))
    assert r.weights["a"] == pytest.approx(0.75, abs=1e-12)
    assert r.weights["b"] == pytest.approx(0.25, abs=1e-12)
    assert r.lambda_max == pytest.approx(2, abs=1e-12)
    assert r.consistency_index == pytest.approx(0, abs=1e-12)


def test_planted_three():
    w = np.array([0.6, 0.3, 0.1])
    r = ahp_weights(PairwiseMatrix.from_weights("xyz", w))
    assert [v for _, v in r.weights.entries] == pytest.approx(w, abs=1e-9)
    assert r.consistency_ratio == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("n, ri", [(1, 0.0), (2, 0.0), (3, 0.58), (4, 0.90), (7, 1.32), (10, 1.49)])
def test_random_index(n, ri):
    assert random_index(n) == ri


@pytest.mark.parametrize("n", [0, 11])
def test_random_index_exhausted(n):
    with pytest.raises(DataError, match="RI table exhausted"):
        random_index(n)


def test_inconsistent_flag():
    # a > b, b > c, but c >> a
    m = PairwiseMatrix(("a", "b", "c"), [[1, 5, 1 / 7], [1 / 5, 1, 5], [7, 1 / 5, 1]])
    r = ahp_weights(m)
    assert r.consistency_ratio > 0.1
    assert r.inconsistent
    assert sum(v for _, v in r.weights.entries) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize(
    "entries",
    [
        [[1, 2], [2, 1]],  # not reciprocal
        [[2, 1], [1, 1]],  # bad diagonal
        [[1, 12], [1 / 12, 1]],  # beyond Saaty scale
        [[1, -1], [-1, 1]],
    ],
)
def test_invalid_matrices(entries):
    with pytest.raises(DataError):
        PairwiseMatrix(("a", "b"), entries)


def test_needs_two_criteria():
    with pytest.raises(DataError):
        ahp_weights(PairwiseMatrix(("a",), [[1.0]]))


saaty = st.sampled_from([1 / 9, 1 / 7, 1 / 5, 1 / 3, 1, 3, 5, 7, 9])


@st.composite
def reciprocal_matrices(draw):
    n = draw(st.integers(2, 8))
    a = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a[i, j] = draw(saaty)
            a[j, i] = 1 / a[i, j]
    return a


@settings(max_examples=60)
@given(reciprocal_matrices())
def test_lambda_max_at_least_n(a):
    n = a.shape[0]
    r = ahp_weights(PairwiseMatrix(tuple(map(str, range(n))), a))
    assert r.lambda_max >= n - 1e-9
    # weights are the Perron vector of a
    w = np.array([v for _, v in r.weights.entries])
    np.testing.assert_allclose(a @ w, r.lambda_max * w, rtol=1e-9)


@settings(max_examples=40)
@given(reciprocal_matrices(), st.randoms(use_true_random=False))
def test_permutation_equivariance(a, rnd):
    n = a.shape[0]
    labels = tuple(f"c{i}" for i in range(n))
    perm = list(range(n))
    rnd.shuffle(perm)
    base = ahp_weights(PairwiseMatrix(labels, a)).weights.as_dict()
    permuted = ahp_weights(PairwiseMatrix(tuple(labels[p] for p in perm), a[np.ix_(perm, perm)])).weights
    for k, v in permuted.entries:
        assert v == pytest.approx(base[k], abs=1e-12)
