"""Pairwise association measures.

All functions are pure; the randomized dependence coefficient draws its
projections only from ``RdcParams.seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

F_CAP = 1e12
DEFAULT_BINS = 10
CCA_RIDGE = 1e-8


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class AssociationScore:
    """A measure value plus a flag set when the input made it undefined."""

    value: float
    kind: str
    degenerate: bool = False


@dataclass(frozen=True)
class RdcParams:
    k: int = 5
    s: float = 1.0 / 6.0
    seed: int = 0
    repetitions: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.s > 0:
            raise ValueError(f"s must be > 0, got {self.s}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")


def _pair(x, y, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise MeasureError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < min_len:
        raise MeasureError(f"need at least {min_len} observations, got {x.shape[0]}")
    return x, y


def _is_constant(v: np.ndarray) -> bool:
    return bool(v.size == 0 or np.all(v == v[0]))


# ----------------------------------------------------------------- pearson

def pearson_score(x, y) -> AssociationScore:
    x, y = _pair(x, y, 2)
    if _is_constant(x) or _is_constant(y):
        return AssociationScore(0.0, "pearson", True)
    dx = x - x.mean()
    dy = y - y.mean()
    # rescale so tiny-magnitude inputs do not underflow in the products
    sx = np.max(np.abs(dx))
    sy = np.max(np.abs(dy))
    if sx == 0.0 or sy == 0.0:
        return AssociationScore(0.0, "pearson", True)
    dx = dx / sx
    dy = dy / sy
    # one sqrt of the product keeps r(x, x) == 1 exactly
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denom == 0.0:
        return AssociationScore(0.0, "pearson", True)
    r = float(np.dot(dx, dy)) / denom
    return AssociationScore(min(1.0, max(-1.0, r)), "pearson")


def pearson(x, y) -> float:
    """Sample Pearson correlation; 0.0 if either vector is constant."""
    return pearson_score(x, y).value


# ------------------------------------------------------- mutual information

def discretize(x, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Integer codes for ``x``.

    Columns with at most ``bins`` distinct values keep one code per value.
    Otherwise values go to ``bins`` equal-frequency bins by rank; ties share
    a bin, so the codes only depend on the ordering of ``x``.
    """
    if bins < 2:
        raise MeasureError(f"bins must be >= 2, got {bins}")
    x = np.asarray(x, dtype=np.float64).ravel()
    uniq, inverse = np.unique(x, return_inverse=True)
    if uniq.size <= bins:
        return inverse.astype(np.int64)
    n = x.size
    # rank of the first occurrence of each tied group (0-based)
    first_rank = np.searchsorted(np.sort(x), x, side="left")
    return np.minimum(first_rank * bins // n, bins - 1).astype(np.int64)


def contingency_table(a_codes: np.ndarray, b_codes: np.ndarray) -> np.ndarray:
    ra = int(a_codes.max()) + 1
    rb = int(b_codes.max()) + 1
    flat = np.bincount(a_codes * rb + b_codes, minlength=ra * rb)
    return flat.reshape(ra, rb)


def mutual_information_from_table(counts) -> float:
    """Plug-in mutual information (nats) of a contingency table of counts.

    Cell terms are summed with ``math.fsum`` so the result does not depend on
    cell order; in particular it is identical for a table and its transpose.
    """
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n <= 0:
        return 0.0
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    i, j = np.nonzero(counts)
    c = counts[i, j]
    terms = (c / n) * np.log((c * n) / (rows[i] * cols[j]))
    return max(0.0, math.fsum(terms.tolist()))


def mutual_information_score(x, y, bins: int = DEFAULT_BINS) -> AssociationScore:
    x, y = _pair(x, y)
    degenerate = _is_constant(x) or _is_constant(y)
    table = contingency_table(discretize(x, bins), discretize(y, bins))
    return AssociationScore(mutual_information_from_table(table), "mutual_information", degenerate)


def mutual_information(x, y, bins: int = DEFAULT_BINS) -> float:
    """Binned plug-in mutual information in nats; symmetric and non-negative."""
    return mutual_information_score(x, y, bins).value


# ------------------------------------------------------------- F statistic

def f_statistic_score(x, labels) -> AssociationScore:
    x, y = _pair(x, labels, 3)
    if not np.all((y == 0) | (y == 1)):
        raise MeasureError("labels must be 0/1")
    g1 = y == 1
    n1 = int(g1.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise MeasureError("f_statistic needs both classes present")
    if _is_constant(x):
        return AssociationScore(0.0, "f_statistic", True)
    x0 = x[~g1]
    x1 = x[g1]
    m0 = x0.mean()
    m1 = x1.mean()
    grand = x.mean()
    ss_between = n0 * (m0 - grand) ** 2 + n1 * (m1 - grand) ** 2
    ss_within = float(np.sum((x0 - m0) ** 2) + np.sum((x1 - m1) ** 2))
    df_within = x.size - 2
    if ss_within <= 0.0:
        return AssociationScore(F_CAP if ss_between > 0 else 0.0, "f_statistic")
    f = ss_between / (ss_within / df_within)
    return AssociationScore(float(min(f, F_CAP)), "f_statistic")


def f_statistic(x, labels) -> float:
    """Two-group one-way ANOVA F; capped at ``F_CAP``, 0.0 for a constant column."""
    return f_statistic_score(x, labels).value


# ----------------------------------------------------------------- RDC

def copula_transform(x) -> np.ndarray:
    """Average ranks divided by n, so values lie in (0, 1]."""
    x = np.asarray(x, dtype=np.float64).ravel()
    return rankdata(x, method="average") / x.size


def _block_factor(cov: np.ndarray) -> np.ndarray:
    p = cov.shape[0]
    if p > 1:
        ridge = CCA_RIDGE * np.trace(cov) / p
        cov = cov + ridge * np.eye(p)
    return np.linalg.cholesky(cov)


def max_canonical_correlation(a, b) -> float:
    """Largest canonical correlation between the column sets ``a`` and ``b``.

    Multi-column blocks get a ridge of ``1e-8 * trace / p`` on the diagonal of
    their covariance. Single columns are left exact, so for 1-D inputs the
    result is ``|pearson(a, b)|``. A constant block gives 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise MeasureError(f"row mismatch: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    # constant columns carry no signal; centering would leave only rounding residue
    a = a[:, np.any(a != a[:1], axis=0)]
    b = b[:, np.any(b != b[:1], axis=0)]
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 0.0
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    # the result is scale invariant; unit-scaling columns keeps tiny inputs from underflowing
    a = a / np.max(np.abs(a), axis=0)
    b = b / np.max(np.abs(b), axis=0)
    caa = a.T @ a / (n - 1)
    cbb = b.T @ b / (n - 1)
    cab = a.T @ b / (n - 1)
    if np.trace(caa) <= 0 or np.trace(cbb) <= 0:
        return 0.0
    try:
        la = _block_factor(caa)
        lb = _block_factor(cbb)
    except np.linalg.LinAlgError:
        return 0.0
    # whitened cross-covariance: La^-1 Cab Lb^-T
    left = np.linalg.solve(la, cab)
    m = np.linalg.solve(lb, left.T).T
    top = float(np.linalg.svd(m, compute_uv=False)[0])
    return min(1.0, max(0.0, top))


def _random_features(u: np.ndarray, k: int, s: float, rng: np.random.Generator) -> np.ndarray:
    w = rng.normal(0.0, math.sqrt(s), size=k)
    phase = rng.uniform(-math.pi, math.pi, size=k)
    return np.sin(np.outer(u, w) + phase)


def rdc(x, y, params: RdcParams | None = None) -> float:
    """Randomized dependence coefficient.

    Both variables are copula-transformed, expanded into ``params.k`` random
    sinusoidal features ``sin(w * u + b)`` with ``w ~ N(0, s)`` and
    ``b ~ U(-pi, pi)``, and scored by their largest canonical correlation.
    The reported value is the median over ``params.repetitions`` independent
    projection draws.
    """
    params = params or RdcParams()
    x, y = _pair(x, y)
    if x.size < params.k + 2:
        raise MeasureError(f"rdc needs at least k + 2 = {params.k + 2} observations, got {x.size}")
    ux = copula_transform(x)
    uy = copula_transform(y)
    rng = np.random.default_rng(params.seed)
    vals = []
    for _ in range(params.repetitions):
        fx = _random_features(ux, params.k, params.s, rng)
        fy = _random_features(uy, params.k, params.s, rng)
        vals.append(max_canonical_correlation(fx, fy))
    return float(np.median(vals))


def rdc_score(x, y, params: RdcParams | None = None) -> AssociationScore:
    x, y = _pair(x, y)
    degenerate = _is_constant(x) or _is_constant(y)
    return AssociationScore(rdc(x, y, params), "rdc", degenerate)
