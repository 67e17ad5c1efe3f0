"""Cross-check diagnostics between two rankings of the same cities.

Paired location tests on rank differences (Student's t, sign, Wilcoxon
signed rank) plus a moment-matched Gaussian for the difference
distribution. All p-values are two-sided.

Signed-rank statistic convention: ``S = W+ - n(n+1)/4``, the positive
rank sum centered on its null mean. This is the form reported by common
statistics packages as "S" (not the raw W+).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import DataError, DegenerateError, NumericError
from .model import Ranking

EXACT_CUTOFF = 25


class LocationTest(enum.Enum):
    STUDENT_T = "student_t"
    SIGN = "sign"
    SIGNED_RANK = "signed_rank"


class PMethod(enum.Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


@dataclass(frozen=True)
class LocationTestResult:
    kind: LocationTest
    statistic: float
    p_value: float
    method: PMethod
    n_effective: int
    infinite_statistic: bool = False


@dataclass(frozen=True)
class RankDifference:
    labels: tuple[str, ...]
    official_rank: np.ndarray
    pca_rank: np.ndarray
    difference: np.ndarray


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def width(self) -> float:
        return float(self.edges[1] - self.edges[0])


@dataclass(frozen=True)
class GaussianFit:
    mean: float
    sd: float
    n: int
    histogram: Histogram | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.sd > 0:
            raise DegenerateError("Gaussian fit needs a positive standard deviation")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * ((x - self.mean) / self.sd) ** 2) / (self.sd * math.sqrt(2 * math.pi))

    def expected_counts(self, edges) -> np.ndarray:
        """Expected bin counts under the fitted normal, n * P(bin)."""
        z = (np.asarray(edges, dtype=float) - self.mean) / (self.sd * math.sqrt(2))
        cdf = 0.5 * (1 + np.array([math.erf(v) for v in z]))
        return self.n * np.diff(cdf)


def rank_difference(official: Ranking, ours: Ranking) -> RankDifference:
    """Per-city official rank minus our rank, in the official ranking's label order."""
    if set(official.labels) != set(ours.labels) or len(official.labels) != len(ours.labels):
        diff = sorted(set(official.labels) ^ set(ours.labels))
        raise DataError(f"ranking label mismatch: {', '.join(diff) or 'duplicate labels'}")
    ours_map = ours.as_dict()
    o = official.ranks
    p = np.array([ours_map[lab] for lab in official.labels])
    return RankDifference(official.labels, o, p, o - p)


def _nonzero(differences) -> np.ndarray:
    d = np.asarray(differences, dtype=float)
    if d.ndim != 1:
        raise DataError("differences must be a 1-d vector")
    if not np.all(np.isfinite(d)):
        raise DataError("differences must be finite")
    d = d[d != 0]
    if d.size == 0:
        raise DegenerateError("degenerate: no nonzero pairs")
    return d


def signed_rank_null_counts(doubled_ranks) -> np.ndarray:
    """Number of sign assignments giving each value of 2*W+.

    `doubled_ranks` are the (average-tie) ranks times two, so they are
    integers even with ties. Index k of the result counts assignments
    whose doubled positive-rank sum equals k.
    """
    r = [int(v) for v in doubled_ranks]
    # int64 holds 2**n exactly only up to n = 62.
    counts = np.zeros(sum(r) + 1, dtype=np.int64 if len(r) <= 62 else object)
    counts[0] = 1
    top = 0
    for v in r:
        counts[v : top + v + 1] += counts[: top + 1].copy()
        top += v
    return counts


def signed_rank_test(differences, exact_cutoff: int = EXACT_CUTOFF, method: PMethod | None = None) -> LocationTestResult:
    """Wilcoxon signed-rank test of zero location.

    Zeros are dropped and |d| is ranked with average ties. Up to
    `exact_cutoff` nonzero pairs the p-value is exact (dynamic programming
    over the permutation distribution of W+, ties included); above it a
    normal approximation with tie-corrected variance and a 0.5 continuity
    correction is used. Pass `method` to force either path.
    """
    d = _nonzero(differences)
    n = d.size
    ranks = rankdata(np.abs(d), method="average")
    w_plus = float(ranks[d > 0].sum())
    mean = n * (n + 1) / 4
    stat = w_plus - mean
    if method is None:
        method = PMethod.EXACT if n <= exact_cutoff else PMethod.NORMAL_APPROX

    if method is PMethod.EXACT:
        doubled = np.rint(2 * ranks).astype(np.int64)
        total = int(doubled.sum())  # = n(n+1)
        obs = abs(2 * int(np.rint(2 * w_plus)) - total)
        counts = signed_rank_null_counts(doubled)
        k = np.arange(total + 1)
        extreme = np.abs(2 * k - total) >= obs
        p = int(counts[extreme].sum()) / 2**n
    else:
        _, ties = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24 - np.sum(ties**3 - ties) / 48
        if var <= 0:
            raise DegenerateError("degenerate: zero variance in signed-rank statistic")
        z = max(abs(stat) - 0.5, 0.0) / math.sqrt(var)
        p = math.erfc(z / math.sqrt(2))
    return LocationTestResult(LocationTest.SIGNED_RANK, stat, min(1.0, p), method, n)


def sign_test(differences) -> LocationTestResult:
    """Sign test with M = (n+ - n-)/2 and an exact binomial(n, 1/2) p-value."""
    d = _nonzero(differences)
    n = d.size
    n_pos = int(np.sum(d > 0))
    n_neg = n - n_pos
    k = min(n_pos, n_neg)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    p = min(1.0, 2 * tail / 2**n)
    return LocationTestResult(LocationTest.SIGN, (n_pos - n_neg) / 2, p, PMethod.EXACT, n)


def _betacf(a: float, b: float, x: float, eps: float = 1e-15, max_iter: int = 10_000) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NumericError(f"incomplete beta continued fraction did not converge in {max_iter} iterations")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b); accurate to about 1e-10 or better."""
    if not (a > 0 and b > 0):
        raise ValueError("betainc needs a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return _betainc_pair(a, b, x, 1.0 - x)


def _betainc_pair(a: float, b: float, x: float, y: float) -> float:
    # y = 1 - x, supplied separately so callers can avoid cancellation
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def student_t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with `df` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    denom = df + t * t
    if t * t / denom == 0.0:
        return 1.0
    if df / denom == 0.0:
        return 0.0
    return _betainc_pair(df / 2.0, 0.5, df / denom, t * t / denom)


def paired_t_test(differences) -> LocationTestResult:
    d = np.asarray(differences, dtype=float)
    n = d.size
    if n < 2:
        raise DataError("paired t test needs at least two differences")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0:
        if mean == 0:
            raise DegenerateError("degenerate: all differences are zero")
        return LocationTestResult(LocationTest.STUDENT_T, math.copysign(math.inf, mean), 0.0, PMethod.EXACT, n, True)
    t = mean / (sd / math.sqrt(n))
    return LocationTestResult(LocationTest.STUDENT_T, t, student_t_two_sided(t, n - 1), PMethod.EXACT, n)


def freedman_diaconis_histogram(values) -> Histogram:
    """Equal-width histogram with bin width 2 * IQR / n^(1/3).

    Falls back to Scott's width when the IQR is zero or so small relative
    to the range that there would be more bins than observations; the bin
    count never exceeds the sample size. All-equal values give a single
    unit-wide bin.
    """
    x = np.asarray(values, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return Histogram(np.array([lo - 0.5, hi + 0.5]), np.array([x.size]))
    q75, q25 = np.percentile(x, [75, 25])
    width = 2 * (q75 - q25) / x.size ** (1 / 3)
    if not width > 0 or (hi - lo) / width > x.size:
        width = 3.49 * x.std(ddof=1) / x.size ** (1 / 3)
    n_bins = min(x.size, max(1, int(math.ceil((hi - lo) / width))))
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    return Histogram(edges, counts)


def gaussian_fit(differences) -> GaussianFit:
    """Method-of-moments normal fit: sample mean and sample sd (n-1)."""
    d = np.asarray(differences, dtype=float)
    if d.size < 2:
        raise DataError("Gaussian fit needs at least two values")
    sd = float(d.std(ddof=1))
    if not sd > 0:
        raise DegenerateError("degenerate: zero variance")
    return GaussianFit(float(d.mean()), sd, int(d.size), freedman_diaconis_histogram(d))
