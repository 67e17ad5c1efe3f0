"""Reading and writing on-disk artifacts.

Inputs are UTF-8 CSV (data, weights, square matrices) and JSON (index
systems). Outputs are CSV and JSON with every number printed to six
significant digits, LF newlines, and fixed column order, so reports from
identical inputs are byte-identical apart from the provenance timestamp.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .aggregate import CeiScores
from .errors import DataError, DegenerateError
from .model import (
    ClassLevel,
    DataMatrix,
    Direction,
    IndexNode,
    IndexSystem,
    ValueKind,
    WeightVector,
    validate_index_system,
)
from .pca import EigenDecomposition, SymmetricMatrix
from .stats import GaussianFit, Histogram, LocationTestResult, RankDifference
from .weights import PairwiseMatrix

SIG_DIGITS = 6


def fmt(x: float) -> str:
    """Six-significant-digit text for CSV cells."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{SIG_DIGITS}g}"
    return "0" if s == "-0" else s


def round_sig(x: float):
    """Round to six significant digits for JSON; non-finite values become strings."""
    x = float(x)
    if not math.isfinite(x):
        return fmt(x)
    r = float(fmt(x))
    return 0.0 if r == 0 else r


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_rows(path) -> list[list[str]]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    if not rows or all(not any(cell.strip() for cell in r) for r in rows):
        raise DataError(f"{path}: empty file")
    return rows


def _parse_cell(text: str, path, line: int, column: str) -> float:
    cell = text.strip()
    if cell == "":
        raise DataError(f"{path}: missing cell, line {line}, column {column}")
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell, line {line}, column {column}: {cell!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}: non-numeric cell, line {line}, column {column}: {cell!r}")
    return value


def read_data_csv(path, value_kind: ValueKind = ValueKind.RAW) -> DataMatrix:
    """Read a city x index table whose first header cell is ``city``."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "city":
        raise DataError(f"{path}: line 1: first header must be 'city'")
    cols = header[1:]
    if not cols:
        raise DataError(f"{path}: line 1: no index columns")
    if len(set(cols)) != len(cols) or any(c == "" for c in cols):
        raise DataError(f"{path}: line 1: index headers must be unique and nonempty")
    labels, values, seen = [], [], {}
    for line, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: ragged row, line {line}: {len(row)} cells, expected {len(header)}")
        city = row[0]
        if city in seen:
            raise DataError(f"{path}: duplicate city {city!r}, line {line} (first on line {seen[city]})")
        seen[city] = line
        labels.append(city)
        values.append([_parse_cell(cell, path, line, col) for cell, col in zip(row[1:], cols)])
    if not labels:
        raise DataError(f"{path}: empty file (header only)")
    try:
        return DataMatrix(tuple(labels), tuple(cols), np.array(values), value_kind)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def format_data_csv(m: DataMatrix, first_header: str = "city") -> str:
    lines = [",".join([first_header, *m.col_labels])]
    for label, row in zip(m.row_labels, m.values):
        lines.append(",".join([csv_field(label), *(fmt(v) for v in row)]))
    return "\n".join(lines) + "\n"


def csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n\r') or text != text.strip():
        return '"' + text.replace('"', '""') + '"'
    return text


def write_data_csv(m: DataMatrix, path) -> Path:
    path = Path(path)
    _write_text(path, format_data_csv(m))
    return path


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"{path}: cannot write ({exc.strerror})") from None


def read_square_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Labeled square matrix: header row and first column carry the same labels."""
    rows = [r for r in _read_rows(path) if any(c.strip() for c in r)]
    header = [h.strip() for h in rows[0][1:]]
    body = rows[1:]
    if len(body) != len(header):
        raise DataError(f"{path}: matrix has {len(body)} rows but {len(header)} columns")
    values = []
    for line, row in enumerate(body, start=2):
        if len(row) != len(header) + 1:
            raise DataError(f"{path}: ragged row, line {line}")
        if row[0].strip() != header[line - 2]:
            raise DataError(f"{path}: line {line}: row label {row[0].strip()!r} does not match column {header[line - 2]!r}")
        values.append([_parse_cell(c, path, line, col) for c, col in zip(row[1:], header)])
    return tuple(header), np.array(values, dtype=float)


def read_pairwise_csv(path) -> PairwiseMatrix:
    labels, values = read_square_csv(path)
    try:
        return PairwiseMatrix(labels, values)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_symmetric_csv(path) -> SymmetricMatrix:
    labels, values = read_square_csv(path)
    try:
        return SymmetricMatrix(labels, values)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_weights_csv(path) -> WeightVector:
    """Two-column CSV ``index,weight``; weights are rescaled to sum to one."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if header != ["index", "weight"]:
        raise DataError(f"{path}: line 1: header must be 'index,weight'")
    items = []
    for line, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        if len(row) != 2:
            raise DataError(f"{path}: ragged row, line {line}")
        items.append((row[0].strip(), _parse_cell(row[1], path, line, "weight")))
    try:
        return WeightVector.normalized(items)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def format_weights_csv(w: WeightVector) -> str:
    return "index,weight\n" + "".join(f"{k},{fmt(v)}\n" for k, v in w.entries)


_CLASS = {c.value: c for c in ClassLevel}
_DIRECTION = {d.value: d for d in Direction}


def parse_index_system(doc: Any, source: str = "<json>") -> IndexSystem:
    def fail(where, msg):
        raise DataError(f"{source}: {where}: {msg}")

    if not isinstance(doc, dict):
        fail("$", "expected an object")
    version = doc.get("version", "")
    if not isinstance(version, str):
        fail("$.version", "expected a string")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list):
        fail("$.nodes", "expected an array")
    nodes = []
    for i, item in enumerate(raw_nodes):
        where = f"$.nodes[{i}]"
        if not isinstance(item, dict):
            fail(where, "expected an object")
        extra = set(item) - {"id", "name", "class", "parent", "direction", "weight"}
        if extra:
            fail(where, f"unknown keys {sorted(extra)}")
        node_id = item.get("id")
        if not isinstance(node_id, str) or not node_id:
            fail(f"{where}.id", "expected a nonempty string")
        name = item.get("name", node_id)
        if not isinstance(name, str):
            fail(f"{where}.name", "expected a string")
        cls = item.get("class")
        if cls not in _CLASS:
            fail(f"{where}.class", f"unknown class {cls!r}")
        direction = item.get("direction", "positive")
        if direction not in _DIRECTION:
            fail(f"{where}.direction", f"unknown direction {direction!r}")
        parent = item.get("parent")
        if parent is not None and not isinstance(parent, str):
            fail(f"{where}.parent", "expected a string")
        weight = item.get("weight")
        if weight is not None and (isinstance(weight, bool) or not isinstance(weight, (int, float))):
            fail(f"{where}.weight", "expected a number")
        nodes.append(
            IndexNode(
                node_id,
                name,
                _CLASS[cls],
                _DIRECTION[direction],
                parent,
                None if weight is None else float(weight),
            )
        )
    system = IndexSystem(tuple(nodes), version)
    problems = validate_index_system(system)
    if problems:
        raise DataError(f"{source}: invalid index system: " + "; ".join(problems))
    return system


def read_index_system_json(path) -> IndexSystem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from None
    return parse_index_system(doc, str(path))


def bundled_resource(name: str) -> Path:
    return Path(str(resources.files("cei") / "data" / name))


def cei2012_index_system() -> IndexSystem:
    return read_index_system_json(bundled_resource("cei2012_index_system.json"))


def cei2012_correlation() -> SymmetricMatrix:
    """The published six-index correlation matrix (four decimals)."""
    return read_symmetric_csv(bundled_resource("cei2012_correlation.csv"))


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class ReportBundle:
    cei: CeiScores
    pca_score: np.ndarray
    correlation: SymmetricMatrix
    eigen: EigenDecomposition
    retained: int
    threshold: float
    rank_difference: RankDifference
    tests: Mapping[str, LocationTestResult | str]  # str = degenerate reason
    gaussian: GaussianFit | None
    histogram: Histogram
    transform: tuple[float, float] = (-11.0, 61.0)
    inputs: Mapping[str, str] = field(default_factory=dict)
    timestamp: str | None = None

    def __post_init__(self):
        cities = set(self.cei.labels)
        if set(self.rank_difference.labels) != cities:
            raise DataError("report tables disagree on the set of cities")
        if len(self.pca_score) != len(self.cei.labels):
            raise DataError("one PCA score per city required")
        for name, digest in self.inputs.items():
            if len(digest) != 64 or any(ch not in "0123456789abcdef" for ch in digest):
                raise DataError(f"provenance digest for {name!r} is not a SHA-256 hex string")


def _order_by_official(cei: CeiScores) -> np.ndarray:
    return np.argsort(-cei.overall, kind="stable")


def scores_csv(bundle: ReportBundle) -> str:
    rd = bundle.rank_difference
    pos = {lab: i for i, lab in enumerate(rd.labels)}
    lines = ["city,official_cei,pca_score,official_rank,pca_rank,rank_difference"]
    for i in _order_by_official(bundle.cei):
        lab = bundle.cei.labels[i]
        j = pos[lab]
        cells = [
            bundle.cei.overall[i],
            bundle.pca_score[i],
            rd.official_rank[j],
            rd.pca_rank[j],
            rd.difference[j],
        ]
        lines.append(",".join([csv_field(lab), *(fmt(c) for c in cells)]))
    return "\n".join(lines) + "\n"


def eigen_dict(bundle: ReportBundle) -> dict:
    e = bundle.eigen
    r = np.vectorize(round_sig, otypes=[object])
    return {
        "labels": list(e.labels),
        "correlation": r(bundle.correlation.entries).tolist(),
        "eigenvalues": r(e.eigenvalues).tolist(),
        "differences": r(e.differences).tolist(),
        "proportions": r(e.proportions).tolist(),
        "cumulative": r(e.cumulative).tolist(),
        "eigenvectors": {
            f"Y{j + 1}": dict(zip(e.labels, r(e.eigenvectors[:, j]).tolist()))
            for j in range(len(e.labels))
        },
        "retained_components": bundle.retained,
        "retain_threshold": round_sig(bundle.threshold),
        "sweeps": e.sweeps,
    }


def result_dict(result: LocationTestResult | str) -> dict:
    if isinstance(result, str):
        return {"degenerate": True, "reason": result}
    return {
        "degenerate": False,
        "statistic": round_sig(result.statistic),
        "p_value": round_sig(result.p_value),
        "method": result.method.value,
        "n_effective": result.n_effective,
        "infinite_statistic": result.infinite_statistic,
    }


def tests_payload(bundle: ReportBundle) -> dict:
    return {name: result_dict(res) for name, res in bundle.tests.items()}


def histogram_csv(bundle: ReportBundle) -> str:
    h = bundle.histogram
    expected = bundle.gaussian.expected_counts(h.edges) if bundle.gaussian else None
    lines = ["bin_low,bin_high,count,fit_count"]
    for k in range(len(h.counts)):
        fit = fmt(expected[k]) if expected is not None else ""
        lines.append(f"{fmt(h.edges[k])},{fmt(h.edges[k + 1])},{int(h.counts[k])},{fit}")
    return "\n".join(lines) + "\n"


def report_dict(bundle: ReportBundle) -> dict:
    rd = bundle.rank_difference
    pos = {lab: i for i, lab in enumerate(rd.labels)}
    cities = []
    for i in _order_by_official(bundle.cei):
        lab = bundle.cei.labels[i]
        j = pos[lab]
        cities.append(
            {
                "city": lab,
                "official_cei": round_sig(bundle.cei.overall[i]),
                "pca_score": round_sig(bundle.pca_score[i]),
                "official_rank": round_sig(rd.official_rank[j]),
                "pca_rank": round_sig(rd.pca_rank[j]),
                "rank_difference": round_sig(rd.difference[j]),
            }
        )
    g = bundle.gaussian
    return {
        "provenance": {
            "tool": "cei",
            "version": __version__,
            "timestamp": bundle.timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "inputs": dict(sorted(bundle.inputs.items())),
        },
        "transform": {"slope": round_sig(bundle.transform[0]), "intercept": round_sig(bundle.transform[1])},
        "scores": cities,
        "eigen": eigen_dict(bundle),
        "tests": tests_payload(bundle),
        "gaussian_fit": None if g is None else {"mean": round_sig(g.mean), "sd": round_sig(g.sd), "n": g.n},
        "histogram": {
            "edges": [round_sig(v) for v in bundle.histogram.edges],
            "counts": [int(c) for c in bundle.histogram.counts],
        },
    }


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


REPORT_FILES = ("scores.csv", "eigen.json", "tests.json", "histogram.csv", "report.json")


def write_report(bundle: ReportBundle, directory) -> list[Path]:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"{directory}: cannot create output directory ({exc.strerror})") from None
    texts = {
        "scores.csv": scores_csv(bundle),
        "eigen.json": _dump_json(eigen_dict(bundle)),
        "tests.json": _dump_json(tests_payload(bundle)),
        "histogram.csv": histogram_csv(bundle),
        "report.json": _dump_json(report_dict(bundle)),
    }
    paths = []
    for name in REPORT_FILES:
        path = directory / name
        _write_text(path, texts[name])
        paths.append(path)
    return paths


def load_report(directory) -> dict:
    path = Path(directory) / "report.json"
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from None


def report_parts(doc: dict) -> tuple[RankDifference, np.ndarray, Histogram, GaussianFit | None]:
    """Rebuild plotting inputs from a loaded report.json."""
    try:
        rows = doc["scores"]
        labels = tuple(r["city"] for r in rows)
        rd = RankDifference(
            labels,
            np.array([r["official_rank"] for r in rows], dtype=float),
            np.array([r["pca_rank"] for r in rows], dtype=float),
            np.array([r["rank_difference"] for r in rows], dtype=float),
        )
        official = np.array([r["official_cei"] for r in rows], dtype=float)
        hist = Histogram(
            np.array(doc["histogram"]["edges"], dtype=float),
            np.array(doc["histogram"]["counts"], dtype=int),
        )
        g = doc.get("gaussian_fit")
        fit = None
        if g is not None:
            try:
                fit = GaussianFit(float(g["mean"]), float(g["sd"]), int(g["n"]))
            except DegenerateError:
                fit = None
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"report.json: malformed ({exc})") from None
    return rd, official, hist, fit
