"""Domain types shared across the index pipeline.

Everything here is immutable after construction. Arrays held by
:class:`DataMatrix` are copied and flagged read-only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

WEIGHT_TOL = 1e-9


class ClassLevel(enum.Enum):
    FIRST = "first"
    SECOND = "second"
    THIRD = "third"


class Direction(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class ValueKind(enum.Enum):
    RAW = "raw"
    SCORE_0_100 = "score0to100"
    SCORE_60_100 = "score60to100"
    STANDARDIZED = "standardized"
    RANK = "rank"


@dataclass(frozen=True)
class IndexNode:
    id: str
    name: str
    class_level: ClassLevel
    direction: Direction = Direction.POSITIVE
    parent_id: str | None = None
    weight: float | None = None


@dataclass(frozen=True)
class IndexSystem:
    nodes: tuple[IndexNode, ...]
    version: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))

    def node(self, node_id: str) -> IndexNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def first_class(self) -> list[IndexNode]:
        return [n for n in self.nodes if n.class_level is ClassLevel.FIRST]

    def children(self, parent_id: str | None) -> list[IndexNode]:
        return [n for n in self.nodes if n.parent_id == parent_id]


def validate_index_system(system: IndexSystem) -> list[str]:
    """Return a list of human-readable rule violations (empty if valid).

    Violations are data, not exceptions: each names the offending node
    and the rule it breaks.
    """
    problems = []
    by_id: dict[str, IndexNode] = {}
    for node in system.nodes:
        if node.id in by_id:
            problems.append(f"node {node.id!r}: duplicate id")
        else:
            by_id[node.id] = node

    if not any(n.class_level is ClassLevel.FIRST for n in system.nodes):
        problems.append("system: no first-class node")

    expected_parent = {ClassLevel.SECOND: ClassLevel.FIRST, ClassLevel.THIRD: ClassLevel.SECOND}
    for node in system.nodes:
        if node.weight is not None and not (0.0 <= node.weight <= 1.0):
            problems.append(f"node {node.id!r}: weight {node.weight:g} outside [0, 1]")
        if node.class_level is ClassLevel.FIRST:
            if node.parent_id is not None:
                problems.append(f"node {node.id!r}: first-class node has a parent")
            continue
        if node.parent_id is None:
            problems.append(f"node {node.id!r}: {node.class_level.value}-class node has no parent")
            continue
        parent = by_id.get(node.parent_id)
        if parent is None:
            problems.append(f"node {node.id!r}: parent {node.parent_id!r} not found")
        elif parent.class_level is not expected_parent[node.class_level]:
            problems.append(
                f"node {node.id!r}: class chain broken "
                f"({node.class_level.value} under {parent.class_level.value})"
            )

    # A cycle can only survive the chain check through duplicate ids or
    # dangling parents, but walk the ancestry anyway.
    for node in system.nodes:
        seen = {node.id}
        cur = node
        while cur.parent_id is not None and cur.parent_id in by_id:
            cur = by_id[cur.parent_id]
            if cur.id in seen:
                problems.append(f"node {node.id!r}: cycle through {cur.id!r}")
                break
            seen.add(cur.id)

    groups: dict[str | None, list[IndexNode]] = {}
    for node in system.nodes:
        groups.setdefault(node.parent_id, []).append(node)
    for parent_id, siblings in groups.items():
        weighted = [s for s in siblings if s.weight is not None]
        if not weighted:
            continue
        where = "first-class siblings" if parent_id is None else f"children of {parent_id!r}"
        if len(weighted) != len(siblings):
            missing = ", ".join(repr(s.id) for s in siblings if s.weight is None)
            problems.append(f"{where}: partial weights, missing on {missing}")
            continue
        total = sum(s.weight for s in weighted)
        if abs(total - 1.0) > WEIGHT_TOL:
            problems.append(f"{where}: sibling weights sum {total:.10g}")
    return problems


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DataMatrix:
    """City x index table with row and column labels."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    value_kind: ValueKind = ValueKind.RAW

    def __post_init__(self):
        rows = tuple(self.row_labels)
        cols = tuple(self.col_labels)
        vals = _freeze(self.values)
        if vals.ndim != 2 or vals.shape != (len(rows), len(cols)):
            raise DataError(
                f"values shape {vals.shape} does not match {len(rows)} rows x {len(cols)} columns"
            )
        if len(set(rows)) != len(rows):
            raise DataError("duplicate row labels")
        if len(set(cols)) != len(cols):
            raise DataError("duplicate column labels")
        if not np.all(np.isfinite(vals)):
            raise DataError("matrix has missing or non-finite cells")
        kind = self.value_kind
        if kind is ValueKind.SCORE_0_100 and vals.size and (vals.min() < 0 or vals.max() > 100):
            raise DataError("score0to100 matrix has values outside [0, 100]")
        if kind is ValueKind.SCORE_60_100 and vals.size and (vals.min() < 60 or vals.max() > 100):
            raise DataError("score60to100 matrix has values outside [60, 100]")
        if kind is ValueKind.RANK and vals.size:
            n = len(rows)
            target = n * (n + 1) / 2
            if vals.min() <= 0:
                raise DataError("rank matrix has non-positive ranks")
            sums = vals.sum(axis=0)
            for label, s in zip(cols, sums):
                if abs(s - target) > 1e-9:
                    raise DataError(f"rank column {label!r} sums to {s:g}, expected {target:g}")
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.col_labels.index(label)]

    def with_values(self, values, value_kind: ValueKind, col_labels: Sequence[str] | None = None) -> "DataMatrix":
        return DataMatrix(
            self.row_labels,
            self.col_labels if col_labels is None else tuple(col_labels),
            values,
            value_kind,
        )

    def select_columns(self, labels: Sequence[str]) -> "DataMatrix":
        missing = [c for c in labels if c not in self.col_labels]
        if missing:
            raise DataError(f"unknown columns: {', '.join(missing)}")
        idx = [self.col_labels.index(c) for c in labels]
        return DataMatrix(self.row_labels, tuple(labels), self.values[:, idx], self.value_kind)

    def reorder_rows(self, labels: Sequence[str]) -> "DataMatrix":
        if set(labels) != set(self.row_labels) or len(labels) != len(self.row_labels):
            raise DataError("row label sets differ")
        pos = {lab: i for i, lab in enumerate(self.row_labels)}
        idx = [pos[lab] for lab in labels]
        return DataMatrix(tuple(labels), self.col_labels, self.values[idx], self.value_kind)


@dataclass(frozen=True)
class WeightVector:
    """Ordered, nonnegative weights summing to one."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        entries = tuple((str(k), float(w)) for k, w in self.entries)
        ids = [k for k, _ in entries]
        if not entries:
            raise DataError("empty weight vector")
        if len(set(ids)) != len(ids):
            raise DataError("duplicate index ids in weight vector")
        if any(not np.isfinite(w) or w < 0 for _, w in entries):
            raise DataError("weights must be finite and nonnegative")
        total = sum(w for _, w in entries)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise DataError(f"weights sum to {total:.12g}, expected 1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_mapping(cls, weights: Mapping[str, float] | Iterable[tuple[str, float]]) -> "WeightVector":
        items = weights.items() if isinstance(weights, Mapping) else weights
        return cls(tuple(items))

    @classmethod
    def normalized(cls, weights: Mapping[str, float] | Iterable[tuple[str, float]]) -> "WeightVector":
        """Build from arbitrary nonnegative weights by dividing by their sum."""
        items = list(weights.items() if isinstance(weights, Mapping) else weights)
        total = sum(w for _, w in items)
        if not total > 0:
            raise DataError("weights sum to zero")
        return cls(tuple((k, w / total) for k, w in items))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.entries)

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def __getitem__(self, index_id: str) -> float:
        for k, w in self.entries:
            if k == index_id:
                return w
        raise KeyError(index_id)

    def __len__(self):
        return len(self.entries)


# First-class weights published for the 2012 release. Ids follow the
# abbreviations used for the first-class indices elsewhere in the package.
CEI2012_WEIGHTS = (
    ("LCH", 0.304075),  # credit launch
    ("ETP", 0.141675),  # enterprise risk management
    ("SYS", 0.068975),  # construction of credit-reporting system
    ("GOV", 0.1253),  # credit monitoring from government
    ("DIS", 0.1853),  # discredit / dishonesty
    ("EDU", 0.082475),  # credit education
    ("EXP", 0.0922),  # corporate experience
)


def bundled_cei2012_weights() -> WeightVector:
    return WeightVector(CEI2012_WEIGHTS)


def restrict_and_renormalize(w: WeightVector, keep: Iterable[str]) -> WeightVector:
    """Drop every id not in `keep` and rescale the rest to sum to one.

    Entry order follows `w`.
    """
    keep = set(keep)
    unknown = keep.difference(w.ids)
    if unknown:
        raise DataError(f"cannot keep unknown index ids: {', '.join(sorted(unknown))}")
    kept = [(k, v) for k, v in w.entries if k in keep]
    total = sum(v for _, v in kept)
    if not kept or not total > 0:
        raise DataError("degenerate restriction")
    return WeightVector(tuple((k, v / total) for k, v in kept))


@dataclass(frozen=True)
class AffineTransform:
    slope: float = -11.0
    intercept: float = 61.0

    def __post_init__(self):
        if self.slope == 0 or not np.isfinite(self.slope) or not np.isfinite(self.intercept):
            raise DataError("affine transform needs a finite nonzero slope")

    def __call__(self, z):
        return self.slope * np.asarray(z, dtype=float) + self.intercept


@dataclass(frozen=True)
class Ranking:
    """City label -> rank, with 1 the best."""

    labels: tuple[str, ...]
    ranks: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        ranks = _freeze(self.ranks)
        if ranks.shape != (len(labels),):
            raise DataError("ranking length does not match labels")
        if len(set(labels)) != len(labels):
            raise DataError("duplicate labels in ranking")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ranks", ranks)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.ranks.tolist()))
