"""End-to-end PCA cross-check of an official index against its own categories."""

from __future__ import annotations

import itertools
from typing import Mapping

import numpy as np

from .aggregate import CeiScores, average_ranks_desc, rank_by_score
from .errors import DataError, DegenerateError, NumericError
from .io import ReportBundle
from .model import AffineTransform, DataMatrix, Ranking, ValueKind
from .pca import (
    SymmetricMatrix,
    affine_score,
    component_scores,
    correlation_matrix,
    jacobi_eigen,
    reconstruct,
    retain_components,
    standardize_columns,
)
from .stats import (
    EXACT_CUTOFF,
    PMethod,
    freedman_diaconis_histogram,
    gaussian_fit,
    paired_t_test,
    rank_difference,
    sign_test,
    signed_rank_test,
)


def crosscheck(
    categorical_ranks: DataMatrix,
    official: CeiScores,
    threshold: float = 0.15,
    transform: AffineTransform = AffineTransform(),
    exact_cutoff: int = EXACT_CUTOFF,
    matrix_override: SymmetricMatrix | None = None,
    inputs: Mapping[str, str] | None = None,
    timestamp: str | None = None,
) -> ReportBundle:
    """Score cities by the first principal component of their categorical
    rankings and compare the resulting ranking with the official one.

    `categorical_ranks` holds one rank column per first-class index
    (1 = best). With `matrix_override` the eigendecomposition uses that
    correlation matrix instead of the one estimated from the data.
    """
    if categorical_ranks.value_kind is not ValueKind.RANK:
        raise DataError("crosscheck expects categorical rankings")
    labels = categorical_ranks.row_labels
    if tuple(official.labels) != labels:
        pos = {lab: i for i, lab in enumerate(official.labels)}
        missing = set(labels) ^ set(official.labels)
        if missing:
            raise DataError("official and categorical cities differ: " + ", ".join(sorted(missing)))
        official = CeiScores(labels, official.overall[[pos[lab] for lab in labels]], official.components)

    standardized = standardize_columns(categorical_ranks)
    if matrix_override is None:
        corr = correlation_matrix(standardized)
    else:
        corr = matrix_override.reorder(categorical_ranks.col_labels)
    eig = jacobi_eigen(corr)
    k = retain_components(eig, threshold)
    scores = component_scores(standardized, eig, k)
    pca_score = affine_score(scores.column(1), transform)

    official_rank = rank_by_score(official)
    pca_rank = Ranking(labels, average_ranks_desc(pca_score))
    rd = rank_difference(official_rank, pca_rank)

    tests = {}
    for name, fn in (
        ("student_t", paired_t_test),
        ("sign", sign_test),
        ("signed_rank", lambda d: signed_rank_test(d, exact_cutoff)),
    ):
        try:
            tests[name] = fn(rd.difference)
        except DegenerateError as exc:
            tests[name] = str(exc)
    try:
        fit = gaussian_fit(rd.difference)
        hist = fit.histogram
    except DegenerateError:
        fit = None
        hist = freedman_diaconis_histogram(rd.difference)

    return ReportBundle(
        cei=official,
        pca_score=pca_score,
        correlation=corr,
        eigen=eig,
        retained=k,
        threshold=threshold,
        rank_difference=rd,
        tests=tests,
        gaussian=fit,
        histogram=hist,
        transform=(transform.slope, transform.intercept),
        inputs=dict(inputs or {}),
        timestamp=timestamp,
    )


def _brute_signed_rank_p(d: np.ndarray) -> float:
    ranks = average_ranks_desc(-np.abs(d))
    n = d.size
    mean = n * (n + 1) / 4
    obs = abs(ranks[d > 0].sum() - mean)
    hits = 0
    for signs in itertools.product((False, True), repeat=n):
        w = ranks[np.array(signs)].sum()
        hits += abs(w - mean) >= obs - 1e-9
    return hits / 2**n


def self_check(seed: int, trials: int = 5) -> None:
    """Seeded spot checks of the eigensolver and the exact signed-rank path."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n))
        a = (a + a.T) / 2
        eig = jacobi_eigen(SymmetricMatrix(tuple(f"v{i}" for i in range(n)), a))
        err = float(np.linalg.norm(reconstruct(eig) - a))
        if err > 1e-9:
            raise NumericError(f"self-check: eigen reconstruction error {err:.3e}")
        d = rng.integers(-5, 6, size=8).astype(float)
        d[d == 0] = 1.0
        p = signed_rank_test(d, method=PMethod.EXACT).p_value
        q = _brute_signed_rank_p(d)
        if abs(p - q) > 1e-12:
            raise NumericError(f"self-check: signed-rank p {p} != enumeration {q}")
