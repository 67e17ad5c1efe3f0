"""Principal component analysis over standardized index columns.

The pipeline is standardize -> correlation matrix -> cyclic Jacobi
eigendecomposition -> component scores -> affine score map. The
eigensolver is implemented here rather than delegated to LAPACK so that
its convergence criterion and sign convention are explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, NumericError
from .model import AffineTransform, DataMatrix, ValueKind

SYM_TOL = 1e-12


@dataclass(frozen=True)
class SymmetricMatrix:
    labels: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        a = np.array(self.entries, dtype=float, copy=True)
        n = len(labels)
        if a.shape != (n, n):
            raise DataError(f"matrix shape {a.shape} does not match {n} labels")
        if len(set(labels)) != n:
            raise DataError("duplicate labels in symmetric matrix")
        if not np.all(np.isfinite(a)):
            raise DataError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
        if asym > SYM_TOL * scale:
            raise DataError(f"matrix is not symmetric (max |a_ij - a_ji| = {asym:.3g})")
        a.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return len(self.labels)

    def is_correlation(self, tol: float = SYM_TOL) -> bool:
        a = self.entries
        return bool(
            np.allclose(np.diag(a), 1.0, rtol=0, atol=tol) and np.all(np.abs(a) <= 1.0 + tol)
        )

    def reorder(self, labels: Sequence[str]) -> "SymmetricMatrix":
        if sorted(labels) != sorted(self.labels):
            raise DataError(
                "label mismatch: " + ", ".join(sorted(set(labels) ^ set(self.labels)))
            )
        idx = [self.labels.index(lab) for lab in labels]
        return SymmetricMatrix(tuple(labels), self.entries[np.ix_(idx, idx)])


@dataclass(frozen=True)
class EigenDecomposition:
    labels: tuple[str, ...]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, aligned with eigenvalues
    proportions: np.ndarray
    cumulative: np.ndarray
    sweeps: int = 0
    off_diagonal: float = 0.0

    @property
    def differences(self) -> np.ndarray:
        """Gap between consecutive eigenvalues (n-1 entries)."""
        return -np.diff(self.eigenvalues)

    def vector(self, j: int) -> np.ndarray:
        return self.eigenvectors[:, j - 1]


@dataclass(frozen=True)
class ComponentScores:
    labels: tuple[str, ...]
    scores: np.ndarray  # n_cities x k

    @property
    def k(self) -> int:
        return self.scores.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.scores[:, j - 1]


def standardize_columns(m: DataMatrix) -> DataMatrix:
    """Center every column and scale it to unit sample standard deviation."""
    n = m.shape[0]
    if n < 2:
        raise DataError("standardization needs at least two rows")
    x = m.values
    mean = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1)
    for label, s in zip(m.col_labels, sd):
        if not s > 0:
            raise DataError(f"zero-variance column {label!r}")
    return m.with_values((x - mean) / sd, ValueKind.STANDARDIZED)


def correlation_matrix(m: DataMatrix) -> SymmetricMatrix:
    """Sample covariance (n-1) of standardized columns, i.e. their correlation."""
    if m.value_kind is not ValueKind.STANDARDIZED:
        raise DataError("correlation_matrix expects a standardized matrix")
    u = m.values
    c = (u.T @ u) / (u.shape[0] - 1)
    c = (c + c.T) / 2
    # Standardized columns have unit variance by construction; pin the
    # diagonal so rounding cannot leak into eigenvalue sums.
    np.fill_diagonal(c, 1.0)
    return SymmetricMatrix(m.col_labels, np.clip(c, -1.0, 1.0))


def _max_off_diagonal(a: np.ndarray) -> float:
    n = a.shape[0]
    if n < 2:
        return 0.0
    return float(np.max(np.abs(a[~np.eye(n, dtype=bool)])))


def _sign_fix(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return v


def jacobi_eigen(a: SymmetricMatrix, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every (p, q) pair until the largest off-diagonal entry
    falls below ``tol * max(1, ||A||_F)``. Eigenpairs are returned in
    descending order, each vector signed so its largest-magnitude entry
    is positive.
    """
    A = np.array(a.entries, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    sweeps = 0
    off = _max_off_diagonal(A)
    while off >= threshold:
        if sweeps >= max_sweeps:
            raise NumericError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {np.linalg.norm(A - np.diag(np.diag(A))):.3e})"
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < threshold:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                elif tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q]
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        off = _max_off_diagonal(A)

    lam = np.diag(A).copy()
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    V = _sign_fix(V[:, order])
    total = lam.sum()
    if total != 0:
        prop = lam / total
        cum = np.cumsum(prop)
    else:
        prop = np.full(n, np.nan)
        cum = np.full(n, np.nan)
    return EigenDecomposition(a.labels, lam, V, prop, cum, sweeps, off)


def component_scores(standardized: DataMatrix, eig: EigenDecomposition, k: int) -> ComponentScores:
    """Project standardized rows onto the first `k` eigenvectors."""
    n_cols = standardized.shape[1]
    if not 1 <= k <= n_cols:
        raise DataError(f"k={k} outside [1, {n_cols}]")
    if set(standardized.col_labels) != set(eig.labels) or len(eig.labels) != n_cols:
        raise DataError(
            "label mismatch between data and eigenvectors: "
            + ", ".join(sorted(set(standardized.col_labels) ^ set(eig.labels)))
        )
    idx = [eig.labels.index(c) for c in standardized.col_labels]
    vecs = eig.eigenvectors[idx, :k]
    return ComponentScores(standardized.row_labels, standardized.values @ vecs)


def proportion(eig: EigenDecomposition, j: int) -> float:
    if not 1 <= j <= len(eig.eigenvalues):
        raise DataError(f"component {j} out of range")
    return float(eig.eigenvalues[j - 1] / eig.eigenvalues.sum())


def retain_components(eig: EigenDecomposition, threshold: float) -> int:
    """Number of components explaining at least `threshold` of the variance (minimum 1)."""
    if not 0 < threshold < 1:
        raise DataError("threshold must lie in (0, 1)")
    return max(1, int(np.sum(eig.proportions >= threshold)))


def affine_score(z, t: AffineTransform = AffineTransform()) -> np.ndarray:
    return t(z)


def reconstruct(eig: EigenDecomposition) -> np.ndarray:
    v = eig.eigenvectors
    return (v * eig.eigenvalues) @ v.T
