"""Standalone SVG 1.1 figures: rank-difference scatter and histogram.

Output is plain text built in a fixed order with fixed number formatting,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError
from .stats import GaussianFit, Histogram, RankDifference

WIDTH, HEIGHT = 720, 480
MARGIN = dict(left=70, right=20, top=40, bottom=60)


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    """Maps data coordinates into the plotting area."""

    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def x(self, v):
        return self.left + (v - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def y(self, v):
        return self.bottom - (v - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)


def _padded(lo: float, hi: float, frac: float = 0.05) -> tuple[float, float]:
    if hi == lo:
        return lo - 1.0, hi + 1.0
    pad = (hi - lo) * frac
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _axes(fr: _Frame, xlabel: str, ylabel: str, title: str) -> list[str]:
    parts = [
        f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line class="axis" x1="{_f(fr.left)}" y1="{_f(fr.bottom)}" x2="{_f(fr.right)}" y2="{_f(fr.bottom)}" stroke="black"/>',
        f'<line class="axis" x1="{_f(fr.left)}" y1="{_f(fr.top)}" x2="{_f(fr.left)}" y2="{_f(fr.bottom)}" stroke="black"/>',
    ]
    for t in _ticks(fr.x0, fr.x1):
        parts.append(
            f'<text x="{_f(fr.x(t))}" y="{_f(fr.bottom + 18)}" text-anchor="middle" font-size="11">{t:g}</text>'
        )
    for t in _ticks(fr.y0, fr.y1):
        parts.append(
            f'<text x="{_f(fr.left - 6)}" y="{_f(fr.y(t) + 4)}" text-anchor="end" font-size="11">{t:g}</text>'
        )
    parts.append(
        f'<text x="{_f((fr.left + fr.right) / 2)}" y="{HEIGHT - 16}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>'
    )
    cy = (fr.top + fr.bottom) / 2
    parts.append(
        f'<text x="18" y="{_f(cy)}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {_f(cy)})">{escape(ylabel)}</text>'
    )
    return parts


def _document(body: list[str]) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"{path}: cannot write ({exc.strerror})") from None
    return path


def scatter_svg(rd: RankDifference, official_scores: Sequence[float]) -> str:
    x = np.asarray(official_scores, dtype=float)
    y = np.asarray(rd.difference, dtype=float)
    if y.size == 0:
        raise DataError("scatter plot needs at least one point")
    if x.shape != y.shape:
        raise DataError("one official score per rank difference required")
    ylo, yhi = _padded(min(float(y.min()), 0.0), max(float(y.max()), 0.0))
    fr = _Frame(_padded(float(x.min()), float(x.max())), (ylo, yhi))
    body = _axes(fr, "official CEI", "rank difference (official - PCA)", "Rank difference")
    body.append(
        f'<line class="reference-line" x1="{_f(fr.left)}" y1="{_f(fr.y(0.0))}" '
        f'x2="{_f(fr.right)}" y2="{_f(fr.y(0.0))}" stroke="gray" stroke-dasharray="4 3"/>'
    )
    for label, xi, yi in zip(rd.labels, x, y):
        body.append(
            f'<circle cx="{_f(fr.x(xi))}" cy="{_f(fr.y(yi))}" r="3" fill="steelblue">'
            f"<title>{escape(label)}: {yi:g}</title></circle>"
        )
    return _document(body)


def write_svg_scatter(rd: RankDifference, official_scores: Sequence[float], path) -> Path:
    """Rank difference against official score, with a y = 0 reference line."""
    return _write(path, scatter_svg(rd, official_scores))


def histogram_svg(hist: Histogram, fit: GaussianFit | None = None, samples: int = 201) -> str:
    edges = np.asarray(hist.edges, dtype=float)
    counts = np.asarray(hist.counts, dtype=float)
    if counts.size == 0 or counts.sum() == 0:
        raise DataError("histogram needs at least one observation")
    width = edges[1] - edges[0]
    curve_x = curve_y = None
    ymax = float(counts.max())
    if fit is not None:
        curve_x = np.linspace(edges[0], edges[-1], samples)
        curve_y = fit.pdf(curve_x) * fit.n * width
        ymax = max(ymax, float(curve_y.max()))
    fr = _Frame((float(edges[0]), float(edges[-1])), (0.0, ymax * 1.05))
    body = _axes(fr, "rank difference", "number of cities", "Rank difference frequency")
    for k, c in enumerate(counts):
        x0, x1 = fr.x(edges[k]), fr.x(edges[k + 1])
        body.append(
            f'<rect class="bin" x="{_f(x0)}" y="{_f(fr.y(c))}" width="{_f(x1 - x0)}" '
            f'height="{_f(fr.y(0) - fr.y(c))}" fill="lightsteelblue" stroke="white"/>'
        )
    if fit is not None:
        pts = " ".join(f"{_f(fr.x(a))},{_f(fr.y(b))}" for a, b in zip(curve_x, curve_y))
        body.append(f'<polyline class="fit-curve" points="{pts}" fill="none" stroke="firebrick" stroke-width="2"/>')
        body.append(
            f'<text x="{_f(fr.right - 4)}" y="{_f(fr.top + 14)}" text-anchor="end" font-size="12">'
            f"{escape(f'mean {fit.mean:.3g}, sd {fit.sd:.3g}')}</text>"
        )
    return _document(body)


def write_svg_histogram(hist: Histogram, fit: GaussianFit | None, path) -> Path:
    """Bars for the binned differences, overlaid with the fitted normal curve."""
    return _write(path, histogram_svg(hist, fit))
