"""AHP weight derivation from reciprocal pairwise-comparison matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, NumericError
from .model import WeightVector

# Saaty's random consistency index for n = 1..10.
RANDOM_INDEX = (0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49)
CR_LIMIT = 0.1
SAATY_MIN, SAATY_MAX = 1.0 / 9.0, 9.0


def random_index(n: int) -> float:
    if not 1 <= n <= len(RANDOM_INDEX):
        raise DataError(f"RI table exhausted: n={n} outside [1, {len(RANDOM_INDEX)}]")
    return RANDOM_INDEX[n - 1]


@dataclass(frozen=True)
class PairwiseMatrix:
    labels: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        a = np.array(self.entries, dtype=float, copy=True)
        n = len(labels)
        if a.shape != (n, n):
            raise DataError(f"pairwise matrix shape {a.shape} does not match {n} labels")
        if len(set(labels)) != n:
            raise DataError("duplicate labels in pairwise matrix")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise DataError("pairwise entries must be finite and positive")
        if not np.allclose(np.diag(a), 1.0, rtol=0, atol=1e-12):
            raise DataError("pairwise diagonal must be 1")
        bad = np.argwhere(~np.isclose(a * a.T, 1.0, rtol=1e-9, atol=0))
        if bad.size:
            i, j = bad[0]
            raise DataError(f"non-reciprocal matrix: a[{labels[i]},{labels[j]}]={a[i, j]:g}, a[{labels[j]},{labels[i]}]={a[j, i]:g}")
        lo, hi = SAATY_MIN * (1 - 1e-9), SAATY_MAX * (1 + 1e-9)
        if np.any(a < lo) or np.any(a > hi):
            raise DataError("pairwise entries outside the 1/9..9 scale")
        a.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_weights(cls, labels: Sequence[str], w) -> "PairwiseMatrix":
        """Perfectly consistent matrix a_ij = w_i / w_j."""
        w = np.asarray(w, dtype=float)
        return cls(tuple(labels), w[:, None] / w[None, :])


@dataclass(frozen=True)
class AhpResult:
    weights: WeightVector
    lambda_max: float
    consistency_index: float
    consistency_ratio: float
    iterations: int

    @property
    def inconsistent(self) -> bool:
        """True when judgments exceed the 0.1 consistency-ratio limit."""
        return self.consistency_ratio > CR_LIMIT


def principal_eigenvector(a: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> tuple[np.ndarray, int]:
    """Power iteration for the Perron vector of a positive matrix, normalized to sum 1."""
    n = a.shape[0]
    w = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        nxt = a @ w
        nxt /= nxt.sum()
        change = np.max(np.abs(nxt - w) / np.abs(nxt))
        w = nxt
        if change < tol:
            return w, it
    raise NumericError(f"power iteration did not converge after {max_iter} iterations (last change {change:.3g})")


def ahp_weights(m: PairwiseMatrix, tol: float = 1e-12, max_iter: int = 10_000) -> AhpResult:
    n = len(m.labels)
    if n < 2:
        raise DataError("AHP needs at least two criteria")
    ri = random_index(n)
    a = m.entries
    w, iterations = principal_eigenvector(a, tol, max_iter)
    lambda_max = float(np.mean((a @ w) / w))
    ci = (lambda_max - n) / (n - 1)
    cr = ci / ri if ri > 0 else 0.0
    # Renormalize once more so the WeightVector sum check sees exactly 1.
    weights = WeightVector.normalized(zip(m.labels, w.tolist()))
    return AhpResult(weights, lambda_max, ci, cr, iterations)
