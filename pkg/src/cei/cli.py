"""Command-line front end.

Subcommands: normalize, cei, ahp-weights, crosscheck, report.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Every failure writes exactly one line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aggregate import CeiScores, rank_by_score, rank_columns, weighted_cei
from .errors import CeiError, DataError, UsageError
from .io import (
    cei2012_correlation,
    cei2012_index_system,
    csv_field,
    fmt,
    format_weights_csv,
    load_report,
    read_data_csv,
    read_index_system_json,
    read_pairwise_csv,
    read_symmetric_csv,
    read_weights_csv,
    report_parts,
    sha256_file,
    write_data_csv,
    write_report,
)
from .model import AffineTransform, ValueKind, WeightVector, bundled_cei2012_weights, restrict_and_renormalize
from .normalize import NormalizationMethod, normalize_matrix
from .pipeline import crosscheck, self_check
from .svg import write_svg_histogram, write_svg_scatter
from .weights import ahp_weights

BUNDLED_WEIGHTS = "bundled-cei2012"
BUNDLED_MATRIX = "cei2012"
SCALES = {"0-100": ValueKind.SCORE_0_100, "60-100": ValueKind.SCORE_60_100}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _threshold(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def _cutoff(text: str) -> int:
    v = int(text)
    if v < 5:
        raise argparse.ArgumentTypeError("must be at least 5")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cei", description="City commercial-credit index toolkit.")
    p.add_argument("--version", action="version", version=f"cei {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    n = sub.add_parser("normalize", help="efficacy-coefficient scoring of a raw matrix")
    n.add_argument("--data", required=True, type=Path, help="raw city x index CSV")
    n.add_argument("--index-system", type=Path, help="index-system JSON (default: bundled 2012 system)")
    n.add_argument("--method", choices=[m.value for m in NormalizationMethod], default="standard")
    n.add_argument("--out", required=True, type=Path)

    c = sub.add_parser("cei", help="weighted overall index and ranking")
    c.add_argument("--scores", required=True, type=Path, help="per-index evaluation scores CSV")
    c.add_argument("--scale", choices=sorted(SCALES), default="0-100", help="score range of the input")
    src = c.add_mutually_exclusive_group()
    src.add_argument("--weights", default=BUNDLED_WEIGHTS, help=f"'{BUNDLED_WEIGHTS}' or an index,weight CSV")
    src.add_argument("--ahp-matrix", type=Path, help="derive weights from a pairwise-comparison CSV")
    c.add_argument("--renormalize", action="store_true", help="restrict weights to the input columns and rescale")
    c.add_argument("--out", required=True, type=Path)

    a = sub.add_parser("ahp-weights", help="weights from a pairwise-comparison matrix")
    a.add_argument("--matrix", required=True, type=Path)
    a.add_argument("--out", type=Path, help="write index,weight CSV here")

    x = sub.add_parser("crosscheck", help="PCA cross-check against the official index")
    x.add_argument("--categorical", required=True, type=Path, help="categorical rankings or scores CSV")
    x.add_argument("--input-kind", choices=["rankings", "scores"], default="rankings")
    x.add_argument("--official", type=Path, help="CSV with city and one official overall-score column")
    x.add_argument("--weights", default=None, help="weights to compute the official index when --official is absent")
    x.add_argument("--threshold", type=_threshold, default=0.15, help="variance share to retain a component")
    x.add_argument("--affine", nargs=2, type=float, metavar=("SLOPE", "INTERCEPT"), default=(-11.0, 61.0))
    x.add_argument("--exact-cutoff", type=_cutoff, default=25)
    x.add_argument("--matrix-override", help=f"correlation matrix CSV, or '{BUNDLED_MATRIX}' for the published one")
    x.add_argument("--out", required=True, type=Path, help="output directory")
    x.add_argument("--seed", type=int, default=0, help="seed for --self-check")
    x.add_argument("--self-check", action="store_true", help="run seeded numeric self-checks first")
    x.add_argument("--timestamp", help="fixed provenance timestamp (default: now, UTC)")
    x.add_argument("--no-svg", action="store_true", help="skip the SVG figures")

    r = sub.add_parser("report", help="re-render figures and summary from a report directory")
    r.add_argument("--dir", required=True, type=Path)
    return p


def _load_weights(source: str | None, inputs: dict) -> WeightVector:
    if source is None or source == BUNDLED_WEIGHTS:
        return bundled_cei2012_weights()
    path = Path(source)
    w = read_weights_csv(path)
    inputs[path.name] = sha256_file(path)
    return w


def _fit_weights(w: WeightVector, columns, renormalize: bool) -> WeightVector:
    if set(w.ids) == set(columns):
        return w
    if not renormalize:
        missing = sorted(set(w.ids) ^ set(columns))
        raise DataError(f"weight/column mismatch ({', '.join(missing)}); pass --renormalize to restrict")
    extra = sorted(set(columns) - set(w.ids))
    if extra:
        raise DataError(f"weight/column mismatch: no weight for {', '.join(extra)}")
    return restrict_and_renormalize(w, columns)


def cmd_normalize(args) -> int:
    system = read_index_system_json(args.index_system) if args.index_system else cei2012_index_system()
    raw = read_data_csv(args.data)
    out = normalize_matrix(raw, system, NormalizationMethod(args.method))
    write_data_csv(out, args.out)
    print(f"wrote {args.out} ({out.shape[0]} cities x {out.shape[1]} indices, {args.method})")
    return 0


def cmd_cei(args) -> int:
    scores = read_data_csv(args.scores, SCALES[args.scale])
    if args.ahp_matrix:
        result = ahp_weights(read_pairwise_csv(args.ahp_matrix))
        if result.inconsistent:
            print(f"warning: consistency ratio {result.consistency_ratio:.4f} exceeds 0.1", file=sys.stderr)
        w = result.weights
    else:
        w = _load_weights(args.weights, {})
    w = _fit_weights(w, scores.col_labels, args.renormalize)
    cei = weighted_cei(scores, w)
    ranking = rank_by_score(cei)
    lines = ["city,cei,rank"]
    for lab, v, r in zip(cei.labels, cei.overall, ranking.ranks):
        lines.append(f"{csv_field(lab)},{fmt(v)},{fmt(r)}")
    _write(args.out, "\n".join(lines) + "\n")
    print("weights: " + ", ".join(f"{k}={fmt(v)}" for k, v in w.entries))
    print(f"wrote {args.out} ({len(cei.labels)} cities)")
    return 0


def cmd_ahp(args) -> int:
    result = ahp_weights(read_pairwise_csv(args.matrix))
    for k, v in result.weights.entries:
        print(f"{k}\t{fmt(v)}")
    print(f"lambda_max\t{fmt(result.lambda_max)}")
    print(f"CI\t{fmt(result.consistency_index)}")
    print(f"CR\t{fmt(result.consistency_ratio)}")
    if result.inconsistent:
        print(f"warning: consistency ratio {result.consistency_ratio:.4f} exceeds 0.1", file=sys.stderr)
    if args.out:
        _write(args.out, format_weights_csv(result.weights))
    return 0


def cmd_crosscheck(args) -> int:
    if args.self_check:
        self_check(args.seed)
    if args.input_kind == "rankings":
        categorical = read_data_csv(args.categorical, ValueKind.RANK)
        ranks = categorical
    else:
        categorical = read_data_csv(args.categorical, ValueKind.SCORE_0_100)
        ranks = rank_columns(categorical)
    inputs = {args.categorical.name: sha256_file(args.categorical)}

    if args.official is not None:
        off = read_data_csv(args.official)
        if off.shape[1] != 1:
            raise DataError(f"{args.official}: expected exactly one score column, found {off.shape[1]}")
        inputs[args.official.name] = sha256_file(args.official)
        official = CeiScores(off.row_labels, off.values[:, 0], off)
    elif args.input_kind == "scores":
        w = _fit_weights(_load_weights(args.weights, inputs), categorical.col_labels, renormalize=True)
        official = weighted_cei(categorical, w)
    else:
        raise UsageError("--official is required when --input-kind is rankings")

    override = None
    if args.matrix_override == BUNDLED_MATRIX:
        override = cei2012_correlation()
    elif args.matrix_override:
        override = read_symmetric_csv(args.matrix_override)
        inputs[Path(args.matrix_override).name] = sha256_file(args.matrix_override)

    bundle = crosscheck(
        ranks,
        official,
        threshold=args.threshold,
        transform=AffineTransform(*args.affine),
        exact_cutoff=args.exact_cutoff,
        matrix_override=override,
        inputs=inputs,
        timestamp=args.timestamp,
    )
    write_report(bundle, args.out)
    if not args.no_svg:
        write_svg_scatter(bundle.rank_difference, _aligned_official(bundle), args.out / "scatter.svg")
        write_svg_histogram(bundle.histogram, bundle.gaussian, args.out / "histogram.svg")
    _print_summary(bundle)
    return 0


def _aligned_official(bundle) -> np.ndarray:
    pos = {lab: i for i, lab in enumerate(bundle.cei.labels)}
    return np.array([bundle.cei.overall[pos[lab]] for lab in bundle.rank_difference.labels])


def _print_summary(bundle) -> None:
    e = bundle.eigen
    print(f"cities: {len(bundle.cei.labels)}  indices: {len(e.labels)}")
    print("eigenvalues: " + " ".join(f"{v:.8f}" for v in e.eigenvalues))
    print(f"top eigenvalue: {e.eigenvalues[0]:.6f}  proportion: {e.proportions[0]:.4f}")
    print(f"components retained at {bundle.threshold:g}: {bundle.retained}")
    for name, res in bundle.tests.items():
        if isinstance(res, str):
            print(f"{name}: {res}")
        else:
            print(f"{name}: statistic {res.statistic:g}  p {res.p_value:.4f}  ({res.method.value}, n={res.n_effective})")
    g = bundle.gaussian
    if g is None:
        print("gaussian fit: degenerate (zero variance)")
    else:
        print(f"gaussian fit: mean {g.mean:.4g}  sd {g.sd:.4g}")


def cmd_report(args) -> int:
    doc = load_report(args.dir)
    rd, official, hist, fit = report_parts(doc)
    write_svg_scatter(rd, official, args.dir / "scatter.svg")
    if hist.counts.sum() > 0:
        write_svg_histogram(hist, fit, args.dir / "histogram.svg")
    eig = doc.get("eigen", {})
    print(f"cities: {len(rd.labels)}")
    if eig.get("eigenvalues"):
        print("eigenvalues: " + " ".join(f"{v:g}" for v in eig["eigenvalues"]))
        print(f"top eigenvalue: {eig['eigenvalues'][0]:g}  proportion: {eig['proportions'][0]:g}")
    for name, res in doc.get("tests", {}).items():
        if res.get("degenerate"):
            print(f"{name}: {res['reason']}")
        else:
            print(f"{name}: statistic {res['statistic']}  p {res['p_value']}")
    print(f"wrote {args.dir / 'scatter.svg'}")
    return 0


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"{path}: cannot write ({exc.strerror})") from None


COMMANDS = {
    "normalize": cmd_normalize,
    "cei": cmd_cei,
    "ahp-weights": cmd_ahp,
    "crosscheck": cmd_crosscheck,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CeiError as exc:
        _fail(exc)
        return exc.exit_code
    except OSError as exc:
        _fail(exc)
        return 2


def _fail(exc: Exception) -> None:
    # one diagnostic line, whatever the message looks like
    print("cei: error: " + " ".join(str(exc).split()), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
