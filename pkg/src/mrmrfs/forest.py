"""Random forest of entropy-split CART trees for binary labels.

Each tree is grown on a bootstrap sample of size n. At every node a random
subset of candidate features is scanned exhaustively: thresholds are the
midpoints between consecutive distinct sorted values, and the split with the
largest entropy gain wins. Equal gains go to the lowest feature index, then
the lowest threshold. Rows with ``x <= threshold`` go left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import xlogy

from mrmrfs._seeding import derive_seed
from mrmrfs.dataset import Dataset

MaxFeatures = Literal["sqrt", "log2", "all"]

# smallest gain treated as an improvement; guards against rounding noise
_MIN_GAIN = 1e-12
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 50
    max_depth: int = 10
    min_samples_leaf: int = 50
    max_features: MaxFeatures = "sqrt"
    split_criterion: str = "entropy"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_features not in ("sqrt", "log2", "all"):
            raise ValueError(f"max_features must be sqrt, log2 or all, got {self.max_features!r}")
        if self.split_criterion != "entropy":
            raise ValueError("only the entropy split criterion is supported")

    def n_candidates(self, m: int) -> int:
        if self.max_features == "sqrt":
            k = int(math.sqrt(m))
        elif self.max_features == "log2":
            k = int(math.log2(m)) if m > 1 else 1
        else:
            k = m
        return max(1, min(m, k))


# Presets used for the hyperparameter comparison.
RF_V1 = ForestParams(n_trees=50, max_depth=10, min_samples_leaf=50, max_features="sqrt")
RF_V2 = ForestParams(n_trees=20, max_depth=5, min_samples_leaf=20, max_features="log2")


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat binary tree. ``feature[i] == -1`` marks a leaf.

    ``value[i]`` is the class-1 frequency of the training rows reaching node i.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_node: np.ndarray
    gain: np.ndarray

    @classmethod
    def leaf(cls, p1: float, n: int = 1) -> "Tree":
        return cls(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            value=np.array([float(p1)]),
            n_node=np.array([n]),
            gain=np.array([0.0]),
        )

    @property
    def n_splits(self) -> int:
        return int(np.sum(self.feature >= 0))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``x``."""
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            go_left = x[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return node

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.value[self.apply(x)]

    def raw_importance(self, m: int) -> np.ndarray:
        """Per-feature sum of (node fraction of root) x (entropy gain)."""
        imp = np.zeros(m)
        internal = self.feature >= 0
        if internal.any():
            weight = self.n_node[internal] / self.n_node[0] * self.gain[internal]
            np.add.at(imp, self.feature[internal], weight)
        return imp


def _entropy(pos: np.ndarray, tot: np.ndarray) -> np.ndarray:
    """Binary entropy in bits of pos/tot, elementwise (tot > 0)."""
    p = pos / tot
    q = 1.0 - p
    return -(xlogy(p, p) + xlogy(q, q)) / _LN2


def _best_split(sub: np.ndarray, y: np.ndarray, feats: np.ndarray, min_leaf: int):
    """Best (gain, feature, threshold) over ``feats`` or None if no valid split.

    ``sub`` holds the node's rows restricted to ``feats`` (sorted ascending).
    """
    n = y.shape[0]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ys = y[order]
    # candidate split after sorted position i-1, left size i for i in 1..n-1
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    left_pos = np.cumsum(ys, axis=0)[:-1].astype(np.float64)
    total_pos = float(y.sum())
    right_n = n - left_n
    right_pos = total_pos - left_pos
    h_parent = float(_entropy(np.array(total_pos), np.array(float(n))))
    child = (left_n * _entropy(left_pos, left_n) + right_n * _entropy(right_pos, right_n)) / n
    gain = h_parent - child
    valid = xs[:-1] < xs[1:]
    sizes = np.arange(1, n)
    valid &= ((sizes >= min_leaf) & (n - sizes >= min_leaf))[:, None]
    gain = np.where(valid, gain, -np.inf)
    best_pos = np.argmax(gain, axis=0)  # first max = lowest threshold
    best_gain = gain[best_pos, np.arange(feats.size)]
    top = np.max(best_gain)
    if not np.isfinite(top) or top <= _MIN_GAIN:
        return None
    j = int(np.flatnonzero(best_gain == top)[0])  # lowest feature index
    i = int(best_pos[j])
    thr = 0.5 * (xs[i, j] + xs[i + 1, j])
    if not thr < xs[i + 1, j]:  # adjacent floats: keep the split exact
        thr = xs[i, j]
    return float(top), int(feats[j]), float(thr)


def grow_tree(x: np.ndarray, y: np.ndarray, params: ForestParams, rng: np.random.Generator) -> Tree:
    """Grow one tree on the given rows (no bootstrap here)."""
    m = x.shape[1]
    n_cand = params.n_candidates(m)
    feature, threshold, left, right, value, n_node, gain = [], [], [], [], [], [], []

    def new_node(rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()) if rows.size else 0.0)
        n_node.append(int(rows.size))
        gain.append(0.0)
        return len(feature) - 1

    root_rows = np.arange(x.shape[0])
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        yr = y[rows]
        pos = int(yr.sum())
        if (
            depth >= params.max_depth
            or rows.size < 2 * params.min_samples_leaf
            or pos == 0
            or pos == rows.size
        ):
            continue
        if n_cand < m:
            feats = np.sort(rng.choice(m, size=n_cand, replace=False))
        else:
            feats = np.arange(m)
        found = _best_split(x[np.ix_(rows, feats)], yr, feats, params.min_samples_leaf)
        if found is None:
            continue
        g, f, thr = found
        go_left = x[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node] = f
        threshold[node] = thr
        gain[node] = g
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        # push right first so the left subtree is numbered first
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_node=np.array(n_node, dtype=np.int64),
        gain=np.array(gain, dtype=np.float64),
    )


@dataclass(frozen=True, eq=False)
class Forest:
    trees: list[Tree]
    n_features: int
    params: ForestParams = field(default_factory=ForestParams)
    importance: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.importance is None:
            object.__setattr__(self, "importance", _mdi(self.trees, self.n_features))

    def predict_proba(self, rows) -> np.ndarray:
        return predict_proba(self, rows)


def _mdi(trees: list[Tree], m: int) -> np.ndarray:
    total = np.mean([t.raw_importance(m) for t in trees], axis=0) if trees else np.zeros(m)
    s = total.sum()
    return total / s if s > 0 else np.zeros(m)


def train_forest_arrays(x: np.ndarray, y: np.ndarray, params: ForestParams) -> Forest:
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    if n == 0:
        raise ValueError("cannot train a forest on an empty dataset")
    if not 0 < int(y.sum()) < n:
        raise ValueError("training labels contain a single class")
    if n <= params.min_samples_leaf:
        raise ValueError(
            f"need more than min_samples_leaf={params.min_samples_leaf} rows, got {n}"
        )
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(derive_seed(params.seed, "tree", t))
        boot = rng.integers(0, n, size=n)
        trees.append(grow_tree(x[boot], y[boot], params, rng))
    return Forest(trees, x.shape[1], params)


def train_forest(data: Dataset, params: ForestParams | None = None) -> Forest:
    return train_forest_arrays(data.features, data.labels, params or ForestParams())


def predict_proba(forest: Forest, rows) -> np.ndarray:
    """Mean over trees of the class-1 frequency in the leaf each row reaches."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != forest.n_features:
        raise ValueError(
            f"expected rows with {forest.n_features} columns, got shape {x.shape}"
        )
    out = np.zeros(x.shape[0])
    for tree in forest.trees:
        out += tree.predict_proba(x)
    return np.clip(out / len(forest.trees), 0.0, 1.0)


def feature_importance(forest: Forest) -> np.ndarray:
    """Mean decrease in impurity, normalized to sum 1 (zeros if nothing split)."""
    return forest.importance.copy()
