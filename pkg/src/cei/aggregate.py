"""Linear weighted aggregation of per-index scores into the overall index."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .model import DataMatrix, Ranking, ValueKind, WeightVector


@dataclass(frozen=True)
class CeiScores:
    labels: tuple[str, ...]
    overall: np.ndarray
    components: DataMatrix

    def __post_init__(self):
        overall = np.array(self.overall, dtype=float)
        overall.setflags(write=False)
        if overall.shape != (len(self.labels),):
            raise DataError("one overall score per city required")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "overall", overall)


def weighted_cei(scores: DataMatrix, w: WeightVector | Mapping[str, float]) -> CeiScores:
    """Overall index per city as sum(Z_i * W_i) / sum(W_i).

    The quotient is kept even for normalized weights, so `w` may also be
    a plain mapping of unnormalized nonnegative weights.
    """
    if scores.value_kind not in (ValueKind.SCORE_0_100, ValueKind.SCORE_60_100):
        raise DataError(f"expected evaluation scores, got {scores.value_kind.value}")
    wmap = w.as_dict() if isinstance(w, WeightVector) else dict(w)
    cols = set(scores.col_labels)
    missing_w = [c for c in scores.col_labels if c not in wmap]
    missing_c = [k for k in wmap if k not in cols]
    if missing_w or missing_c:
        parts = []
        if missing_w:
            parts.append(f"no weight for {', '.join(missing_w)}")
        if missing_c:
            parts.append(f"no column for {', '.join(missing_c)}")
        raise DataError("weight/column mismatch: " + "; ".join(parts))
    wv = np.array([wmap[c] for c in scores.col_labels], dtype=float)
    if np.any(wv < 0) or not wv.sum() > 0:
        raise DataError("weights must be nonnegative with a positive sum")
    overall = (scores.values @ wv) / wv.sum()
    return CeiScores(scores.row_labels, overall, scores)


def average_ranks_desc(values) -> np.ndarray:
    """Rank 1 for the largest value; ties share the mean of their ranks."""
    return rankdata(-np.asarray(values, dtype=float), method="average")


def rank_by_score(scores: CeiScores | Sequence[float], labels: Sequence[str] | None = None) -> Ranking:
    if isinstance(scores, CeiScores):
        return Ranking(scores.labels, average_ranks_desc(scores.overall))
    values = np.asarray(scores, dtype=float)
    if labels is None:
        labels = [str(i) for i in range(len(values))]
    return Ranking(tuple(labels), average_ranks_desc(values))


def rank_columns(m: DataMatrix) -> DataMatrix:
    """Turn every score column into average-tie ranks, 1 = highest score."""
    out = np.column_stack([average_ranks_desc(m.values[:, j]) for j in range(m.shape[1])])
    return m.with_values(out, ValueKind.RANK)
