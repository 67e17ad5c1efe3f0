import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import tables
from cei.errors import DataError, NumericError
from cei.io import cei2012_correlation
from cei.model import AffineTransform, DataMatrix, ValueKind
from cei.pca import (
    SymmetricMatrix,
    affine_score,
    component_scores,
    correlation_matrix,
    jacobi_eigen,
    proportion,
    reconstruct,
    retain_components,
    standardize_columns,
)


def _matrix(values, kind=ValueKind.RAW):
    values = np.asarray(values, dtype=float)
    return DataMatrix(
        tuple(f"c{i}" for i in range(values.shape[0])), tuple(f"v{j}" for j in range(values.shape[1])), values, kind
    )


def _sym(a):
    a = np.asarray(a, dtype=float)
    return SymmetricMatrix(tuple(f"v{i}" for i in range(a.shape[0])), a)


# ------------------------------------------------------------ standardize


def test_standardize_simple():
    out = standardize_columns(_matrix([[1.0], [2.0], [3.0]]))
    assert out.values[:, 0].tolist() == [-1.0, 0.0, 1.0]
    assert out.value_kind is ValueKind.STANDARDIZED


def test_standardize_idempotent_and_moments():
    rng = np.random.default_rng(3)
    once = standardize_columns(_matrix(rng.normal(5, 3, size=(40, 4))))
    np.testing.assert_allclose(once.values.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(once.values.std(axis=0, ddof=1), 1, atol=1e-12)
    twice = standardize_columns(once.with_values(once.values, ValueKind.RAW))
    np.testing.assert_allclose(twice.values, once.values, atol=1e-12)


def test_standardize_zero_variance():
    with pytest.raises(DataError, match="v1"):
        standardize_columns(_matrix([[1.0, 2.0], [2.0, 2.0]]))
    with pytest.raises(DataError):
        standardize_columns(_matrix([[1.0]]))


# ------------------------------------------------------------ correlation


def test_correlation_extremes():
    x = np.array([1.0, 4.0, 2.0, 8.0])
    c = correlation_matrix(standardize_columns(_matrix(np.column_stack([x, x, -3 * x + 1]))))
    assert c.entries[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert c.entries[0, 2] == pytest.approx(-1.0, abs=1e-12)
    assert c.is_correlation()


def test_correlation_matches_double_loop():
    rng = np.random.default_rng(7)
    u = standardize_columns(_matrix(rng.normal(size=(30, 6)) @ rng.normal(size=(6, 6))))
    c = correlation_matrix(u).entries
    n, p = u.shape
    for i in range(p):
        for j in range(p):
            acc = 0.0
            for r in range(n):
                acc += u.values[r, i] * u.values[r, j]
            assert c[i, j] == pytest.approx(acc / (n - 1), abs=1e-12)


def test_correlation_requires_standardized():
    with pytest.raises(DataError):
        correlation_matrix(_matrix([[1.0], [2.0]]))


def test_symmetric_matrix_rejects_asymmetry():
    with pytest.raises(DataError):
        _sym([[1.0, 0.5], [0.4, 1.0]])


# ------------------------------------------------------------ Jacobi


def test_identity():
    e = jacobi_eigen(_sym(np.eye(2)))
    assert e.eigenvalues.tolist() == [1.0, 1.0]
    np.testing.assert_allclose(e.proportions, [0.5, 0.5])


def test_two_by_two_analytic():
    e = jacobi_eigen(_sym([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(e.eigenvalues, [3.0, 1.0], atol=1e-14)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(e.eigenvectors[:, 0], [r, r], atol=1e-14)
    np.testing.assert_allclose(e.eigenvectors[:, 1], [r, -r], atol=1e-14)


def test_sign_convention():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(7, 7))
    e = jacobi_eigen(_sym(a + a.T))
    for j in range(7):
        v = e.eigenvectors[:, j]
        assert v[np.argmax(np.abs(v))] > 0


def test_sweep_cap():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6))
    with pytest.raises(NumericError, match="off-diagonal"):
        jacobi_eigen(_sym(a + a.T), max_sweeps=1)


def _charpoly_roots_by_bisection(a):
    """Eigenvalues of a symmetric 3x3 as roots of det(lambda I - A), by grid scan + bisection."""
    tr = np.trace(a)
    minors = a[0, 0] * a[1, 1] - a[0, 1] ** 2 + a[0, 0] * a[2, 2] - a[0, 2] ** 2 + a[1, 1] * a[2, 2] - a[1, 2] ** 2
    det = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )

    def f(x):
        return ((x - tr) * x + minors) * x - det

    bound = np.max(np.sum(np.abs(a), axis=1)) + 1.0  # Gershgorin
    grid = np.linspace(-bound, bound, 20001)
    vals = f(grid)
    roots = []
    for k in range(len(grid) - 1):
        if vals[k] == 0:
            roots.append(grid[k])
        elif vals[k] * vals[k + 1] < 0:
            lo, hi = grid[k], grid[k + 1]
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if f(lo) * f(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            roots.append(0.5 * (lo + hi))
    return np.sort(roots)[::-1]


def test_three_by_three_matches_characteristic_polynomial():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 50:
        a = rng.uniform(-2, 2, size=(3, 3))
        a = (a + a.T) / 2
        exact = np.linalg.eigvalsh(a)
        if np.min(np.diff(exact)) < 1e-2:  # grid scan needs separated roots
            continue
        roots = _charpoly_roots_by_bisection(a)
        assert len(roots) == 3
        np.testing.assert_allclose(jacobi_eigen(_sym(a)).eigenvalues, roots, atol=1e-8)
        checked += 1


sym_matrices = st.integers(1, 12).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False))
).map(lambda a: (a + a.T) / 2)


@settings(max_examples=80, deadline=None)
@given(sym_matrices)
def test_eigen_invariants(a):
    e = jacobi_eigen(_sym(a))
    n = a.shape[0]
    assert np.all(np.diff(e.eigenvalues) <= 0)
    np.testing.assert_allclose(e.eigenvalues.sum(), np.trace(a), atol=1e-9)
    np.testing.assert_allclose(e.eigenvectors.T @ e.eigenvectors, np.eye(n), atol=1e-9)
    assert np.linalg.norm(reconstruct(e) - a) <= 1e-9 * max(1.0, np.linalg.norm(a))


def test_repeated_eigenvalues_subspace():
    # eigenvalue 2 with multiplicity 2: compare projectors, not vectors
    q, _ = np.linalg.qr(np.random.default_rng(5).normal(size=(3, 3)))
    a = q @ np.diag([5.0, 2.0, 2.0]) @ q.T
    a = (a + a.T) / 2
    e = jacobi_eigen(_sym(a))
    np.testing.assert_allclose(e.eigenvalues, [5, 2, 2], atol=1e-12)
    v = e.eigenvectors[:, 1:]
    np.testing.assert_allclose(v @ v.T, q[:, 1:] @ q[:, 1:].T, atol=1e-10)


# ------------------------------------------------------------ published tables


@pytest.fixture(scope="module")
def published():
    return jacobi_eigen(SymmetricMatrix(tables.LABELS, tables.CORRELATION))


def test_bundled_correlation_fixture():
    c = cei2012_correlation()
    assert c.labels == tables.LABELS
    np.testing.assert_array_equal(c.entries, tables.CORRELATION)
    assert c.is_correlation()


def test_published_eigenvalues(published):
    np.testing.assert_allclose(published.eigenvalues, tables.EIGENVALUES, atol=1e-3)
    np.testing.assert_allclose(published.differences, tables.DIFFERENCES, atol=2e-3)
    assert published.eigenvalues.sum() == pytest.approx(6.0, abs=1e-9)


def test_published_eigenvectors(published):
    aligned = tables.align_signs(published.eigenvectors, tables.EIGENVECTORS)
    np.testing.assert_allclose(aligned, tables.EIGENVECTORS, atol=5e-3)
    # Y1 already satisfies the largest-entry-positive convention
    np.testing.assert_allclose(published.eigenvectors[:, 0], tables.EIGENVECTORS[:, 0], atol=5e-3)


def test_published_proportions(published):
    np.testing.assert_allclose(published.proportions, tables.PROPORTIONS, atol=5e-4)
    np.testing.assert_allclose(published.cumulative, tables.CUMULATIVE, atol=5e-4)
    assert proportion(published, 1) == pytest.approx(0.3422, abs=5e-4)
    assert published.cumulative[3] == pytest.approx(0.8199, abs=5e-4)
    assert published.cumulative[-1] == pytest.approx(1.0, abs=1e-9)


def test_retain(published):
    assert retain_components(published, 0.15) == 3
    assert retain_components(published, 0.20) == 1
    assert retain_components(published, 0.99) == 1
    with pytest.raises(DataError):
        retain_components(published, 1.0)


def test_identity_proportions():
    e = jacobi_eigen(_sym(np.eye(5)))
    for j in range(1, 6):
        assert proportion(e, j) == pytest.approx(0.2)


# ------------------------------------------------------------ scores


def test_first_component_formula(published):
    # Z1 is the published Y1 coefficients applied to standardized columns
    rng = np.random.default_rng(9)
    u = standardize_columns(
        DataMatrix(tuple(f"c{i}" for i in range(20)), tables.LABELS, rng.normal(size=(20, 6)))
    )
    z1 = component_scores(u, published, 1).column(1)
    coeffs = np.array([0.244189, -0.210139, 0.496945, 0.526149, 0.310926, 0.525120])
    np.testing.assert_allclose(z1, u.values @ coeffs, atol=5e-3 * np.abs(u.values).sum(axis=1).max())


def test_scores_unit_vector_projection():
    u = standardize_columns(_matrix(np.random.default_rng(1).normal(size=(10, 4))))
    e = jacobi_eigen(_sym(np.diag([1.0, 2.0, 9.0, 3.0])))  # top eigenvector is e3
    np.testing.assert_allclose(component_scores(u, e, 1).column(1), u.values[:, 2], atol=1e-15)


def test_scores_reconstruct_and_are_uncorrelated():
    rng = np.random.default_rng(4)
    u = standardize_columns(_matrix(rng.normal(size=(60, 5)) @ rng.normal(size=(5, 5))))
    e = jacobi_eigen(correlation_matrix(u))
    s = component_scores(u, e, 5)
    np.testing.assert_allclose(s.scores @ e.eigenvectors.T, u.values, atol=1e-9)
    np.testing.assert_allclose(s.scores.mean(axis=0), 0, atol=1e-9)
    np.testing.assert_allclose(s.scores.var(axis=0, ddof=1), e.eigenvalues, atol=1e-9)
    c = np.corrcoef(s.scores, rowvar=False)
    assert np.max(np.abs(c - np.diag(np.diag(c)))) <= 1e-8


def test_scores_label_checks():
    u = standardize_columns(_matrix(np.random.default_rng(1).normal(size=(10, 3))))
    e = jacobi_eigen(SymmetricMatrix(("a", "b", "c"), np.eye(3)))
    with pytest.raises(DataError, match="label mismatch"):
        component_scores(u, e, 1)
    e = jacobi_eigen(_sym(np.eye(3)))
    with pytest.raises(DataError):
        component_scores(u, e, 4)


def test_affine_score():
    assert affine_score(0.0).tolist() == 61.0
    assert affine_score(-1.0).tolist() == 72.0
    z = np.array([0.3, -1.2, 2.5, 0.0])
    s = affine_score(z)
    assert np.argsort(z).tolist() == np.argsort(-s).tolist()
    assert affine_score(z, AffineTransform(2.0, 1.0)).tolist() == (2 * z + 1).tolist()
    with pytest.raises(DataError):
        AffineTransform(0.0, 1.0)
