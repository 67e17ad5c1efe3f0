"""Efficacy-coefficient scoring of raw index values.

Two variants are supported: the standard coefficient maps a column onto
[0, 100] and the modified one onto [60, 100]. Column extremes are taken
from the data itself. Negative indices (lower is better) use the
reflected form so that a higher score always means a better environment.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DataError
from .model import DataMatrix, Direction, IndexSystem, ValueKind


class NormalizationMethod(enum.Enum):
    STANDARD = "standard"
    MODIFIED = "modified"

    @property
    def value_kind(self) -> ValueKind:
        return ValueKind.SCORE_0_100 if self is NormalizationMethod.STANDARD else ValueKind.SCORE_60_100


def _unit_score(x, x_min, x_max, direction: Direction):
    if not x_max > x_min:
        raise DataError("zero-range index")
    if x < x_min or x > x_max:
        raise DataError(f"out of observed range: {x!r} not in [{x_min!r}, {x_max!r}]")
    if direction is Direction.POSITIVE:
        return (x - x_min) / (x_max - x_min)
    return (x_max - x) / (x_max - x_min)


def efficacy_standard(x: float, x_min: float, x_max: float, direction: Direction = Direction.POSITIVE) -> float:
    return _unit_score(x, x_min, x_max, direction) * 100.0


def efficacy_modified(x: float, x_min: float, x_max: float, direction: Direction = Direction.POSITIVE) -> float:
    return _unit_score(x, x_min, x_max, direction) * 40.0 + 60.0


def normalize_column(col, direction: Direction, method: NormalizationMethod, label: str = "?") -> np.ndarray:
    col = np.asarray(col, dtype=float)
    lo, hi = col.min(), col.max()
    if not hi > lo:
        raise DataError(f"zero-range index: column {label!r} is constant")
    if direction is Direction.POSITIVE:
        unit = (col - lo) / (hi - lo)
    else:
        unit = (hi - col) / (hi - lo)
    # Guard the endpoints against rounding so the range invariant is exact.
    unit = np.clip(unit, 0.0, 1.0)
    if method is NormalizationMethod.STANDARD:
        return unit * 100.0
    return unit * 40.0 + 60.0


def normalize_matrix(raw: DataMatrix, system: IndexSystem, method: NormalizationMethod) -> DataMatrix:
    """Score every column of a raw matrix against its own min and max."""
    if raw.value_kind is not ValueKind.RAW:
        raise DataError(f"expected a raw matrix, got {raw.value_kind.value}")
    known = {n.id: n for n in system.nodes}
    unknown = [c for c in raw.col_labels if c not in known]
    if unknown:
        raise DataError(f"columns not in index system: {', '.join(unknown)}")
    out = np.empty_like(raw.values)
    for j, label in enumerate(raw.col_labels):
        out[:, j] = normalize_column(raw.values[:, j], known[label].direction, method, label)
    return raw.with_values(out, method.value_kind)
