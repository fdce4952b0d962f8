"""Greedy minimum-redundancy maximum-relevance feature selection.

At each step every unselected feature ``i`` gets a score from its relevance
``r_i`` to the label and its mean redundancy ``d_i`` against the selected set:

* difference: ``r_i - d_i``
* quotient: ``r_i / max(d_i, eps)``
* relevance_only: ``r_i``

and the highest-scoring feature is appended (lowest index on ties). With
nothing selected yet the redundancy term is undefined, so the first pick is
the relevance argmax under every scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from mrmrfs import measures
from mrmrfs._seeding import derive_seed
from mrmrfs.dataset import Dataset
from mrmrfs.forest import ForestParams, train_forest

Relevance = Literal["mutual_information", "f_statistic", "random_forest_importance"]
Redundancy = Literal["mutual_information", "abs_pearson", "rdc", "none"]
Scheme = Literal["difference", "quotient", "relevance_only"]

QUOTIENT_EPS = 1e-6


@dataclass(frozen=True)
class MethodSpec:
    relevance: Relevance
    redundancy: Redundancy
    scheme: Scheme
    name: str = ""

    def __post_init__(self):
        if self.relevance not in ("mutual_information", "f_statistic", "random_forest_importance"):
            raise ValueError(f"unknown relevance kind {self.relevance!r}")
        if self.redundancy not in ("mutual_information", "abs_pearson", "rdc", "none"):
            raise ValueError(f"unknown redundancy kind {self.redundancy!r}")
        if self.scheme not in ("difference", "quotient", "relevance_only"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if (self.redundancy == "none") != (self.scheme == "relevance_only"):
            raise ValueError("redundancy 'none' goes with scheme 'relevance_only' and only with it")

    def to_dict(self) -> dict:
        return {"name": self.name, "relevance": self.relevance,
                "redundancy": self.redundancy, "scheme": self.scheme}


METHODS: dict[str, MethodSpec] = {
    "MID": MethodSpec("mutual_information", "mutual_information", "difference", "MID"),
    "MIQ": MethodSpec("mutual_information", "mutual_information", "quotient", "MIQ"),
    "FCD": MethodSpec("f_statistic", "abs_pearson", "difference", "FCD"),
    "FCQ": MethodSpec("f_statistic", "abs_pearson", "quotient", "FCQ"),
    "FRQ": MethodSpec("f_statistic", "rdc", "quotient", "FRQ"),
    "RFCQ": MethodSpec("random_forest_importance", "abs_pearson", "quotient", "RFCQ"),
    "RFRQ": MethodSpec("random_forest_importance", "rdc", "quotient", "RFRQ"),
    "RF": MethodSpec("random_forest_importance", "none", "relevance_only", "RF"),
}


def get_method(name: str) -> MethodSpec:
    try:
        return METHODS[name.upper()]
    except KeyError:
        raise ValueError(
            f"unknown method {name!r}; valid names: {', '.join(METHODS)}"
        ) from None


@dataclass(frozen=True)
class Step:
    feature: int
    relevance: float
    redundancy: float | None
    score: float


@dataclass(frozen=True)
class SelectionResult:
    ranked: list[int]
    steps: list[Step]
    method: MethodSpec
    relevance: np.ndarray = field(repr=False, default=None)

    def to_dict(self, names=None) -> dict:
        return {
            "method": self.method.to_dict(),
            "ranked": list(self.ranked),
            "ranked_names": None if names is None else [names[i] for i in self.ranked],
            "steps": [
                {"feature": s.feature, "relevance": s.relevance,
                 "redundancy": s.redundancy, "score": s.score}
                for s in self.steps
            ],
        }


# ------------------------------------------------------------ relevance

def relevance_scores(
    data: Dataset,
    kind: Relevance,
    forest_params: ForestParams | None = None,
    bins: int = measures.DEFAULT_BINS,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature relevance to the label and a per-feature degenerate flag.

    A feature is flagged degenerate when it is constant.
    """
    m = data.m
    y = data.labels
    degenerate = np.array([np.all(data.column(j) == data.column(j)[0]) for j in range(m)])
    if kind == "mutual_information":
        values = np.array([measures.mutual_information(data.column(j), y, bins) for j in range(m)])
    elif kind == "f_statistic":
        values = np.array([measures.f_statistic(data.column(j), y) for j in range(m)])
    elif kind == "random_forest_importance":
        if forest_params is None:
            raise ValueError("random-forest relevance needs forest_params")
        values = train_forest(data, forest_params).importance
    else:
        raise ValueError(f"unknown relevance kind {kind!r}")
    return values.astype(np.float64), degenerate


# ------------------------------------------------------------ redundancy

def pair_rdc_params(params: measures.RdcParams, i: int, j: int) -> measures.RdcParams:
    """RDC params for the unordered feature pair {i, j}; seed depends only on the pair."""
    a, b = min(i, j), max(i, j)
    return measures.RdcParams(params.k, params.s, derive_seed(params.seed, "pair", a, b),
                              params.repetitions)


def pairwise(
    data: Dataset,
    i: int,
    j: int,
    kind: Redundancy,
    rdc_params: measures.RdcParams | None = None,
    bins: int = measures.DEFAULT_BINS,
    signed: bool = False,
) -> float:
    """Redundancy measure between features i and j, evaluated in canonical (min, max) order."""
    a, b = min(i, j), max(i, j)
    xa, xb = data.column(a), data.column(b)
    if kind == "abs_pearson":
        r = measures.pearson(xa, xb)
        return r if signed else abs(r)
    if kind == "mutual_information":
        return measures.mutual_information(xa, xb, bins)
    if kind == "rdc":
        return measures.rdc(xa, xb, pair_rdc_params(rdc_params or measures.RdcParams(), a, b))
    raise ValueError(f"no pairwise measure for redundancy kind {kind!r}")


def redundancy(
    data: Dataset,
    candidate: int,
    selected,
    kind: Redundancy,
    rdc_params: measures.RdcParams | None = None,
    bins: int = measures.DEFAULT_BINS,
    signed: bool = False,
) -> float:
    """Arithmetic mean of the pairwise measure between ``candidate`` and each selected feature."""
    selected = list(selected)
    if not selected:
        raise ValueError("redundancy against an empty selected set is undefined")
    if candidate in selected:
        raise ValueError(f"candidate {candidate} is already selected")
    vals = [pairwise(data, candidate, s, kind, rdc_params, bins, signed) for s in selected]
    return mean_of(vals)


def mean_of(values) -> float:
    """Left-to-right sum divided by count (kept in one place so every caller rounds alike)."""
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


def combine(scheme: Scheme, rel: float, red: float | None, eps: float = QUOTIENT_EPS) -> float:
    if red is None or scheme == "relevance_only":
        return rel
    if scheme == "difference":
        return rel - red
    if scheme == "quotient":
        return rel / max(red, eps)
    raise ValueError(f"unknown scheme {scheme!r}")


# ------------------------------------------------------------ selection

def select(
    data: Dataset,
    method: MethodSpec | str,
    max_features: int,
    forest_params: ForestParams | None = None,
    rdc_params: measures.RdcParams | None = None,
    *,
    bins: int = measures.DEFAULT_BINS,
    signed: bool = False,
    eps: float = QUOTIENT_EPS,
    relevance: tuple[np.ndarray, np.ndarray] | np.ndarray | None = None,
    pair_measure: Callable[[int, int], float] | None = None,
) -> SelectionResult:
    """Rank up to ``max_features`` features greedily.

    ``relevance`` may be supplied precomputed (values, or values and
    degenerate flags). Pairwise redundancy values are memoized per unordered
    pair, so each pair is measured at most once. Features flagged degenerate
    (constant columns) are never picked, so the result is shorter than
    ``max_features`` when only degenerate features remain.
    """
    if isinstance(method, str):
        method = get_method(method)
    m = data.m
    if not 1 <= max_features <= m:
        raise ValueError(f"max_features must lie in [1, {m}], got {max_features}")
    if method.relevance == "random_forest_importance" and forest_params is None and relevance is None:
        forest_params = ForestParams()

    if relevance is None:
        rel, degenerate = relevance_scores(data, method.relevance, forest_params, bins)
    elif isinstance(relevance, tuple):
        rel, degenerate = (np.asarray(v) for v in relevance)
    else:
        rel = np.asarray(relevance, dtype=np.float64)
        degenerate = np.zeros(m, dtype=bool)
    if rel.shape != (m,):
        raise ValueError(f"relevance must have length {m}")

    if pair_measure is None:
        def pair_measure(i: int, j: int) -> float:
            return pairwise(data, i, j, method.redundancy, rdc_params, bins, signed)

    memo: dict[tuple[int, int], float] = {}

    def pair(i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in memo:
            memo[key] = pair_measure(*key)
        return memo[key]

    rel_list = [float(v) for v in rel]
    selected: list[int] = []
    steps: list[Step] = []
    remaining = list(range(m))
    while len(selected) < max_features and remaining:
        if all(degenerate[i] for i in remaining):
            break
        best = None
        for i in remaining:
            if degenerate[i]:
                continue
            if selected and method.scheme != "relevance_only":
                red = mean_of([pair(i, s) for s in selected])
            else:
                red = None
            score = combine(method.scheme, rel_list[i], red, eps)
            if best is None or score > best[3]:
                best = (i, rel_list[i], red, score)
        i = best[0]
        selected.append(i)
        remaining.remove(i)
        steps.append(Step(*best))
    return SelectionResult(selected, steps, method, rel)


def redundancy_heatmap(data: Dataset, indices) -> tuple[np.ndarray, list[str]]:
    """Pearson matrix over the listed features with the label appended last.

    Returns the (k+1) x (k+1) matrix and its row labels.
    """
    indices = [int(i) for i in indices]
    cols = [data.column(i) for i in indices] + [data.labels.astype(np.float64)]
    k = len(cols)
    mat = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            mat[a, b] = mat[b, a] = measures.pearson(cols[a], cols[b])
    return mat, [data.names[i] for i in indices] + ["label"]


def mean_abs_offdiagonal(mat: np.ndarray) -> float:
    k = mat.shape[0]
    if k < 2:
        return 0.0
    off = ~np.eye(k, dtype=bool)
    return float(np.mean(np.abs(mat[off])))
