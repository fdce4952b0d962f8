import math

import numpy as np
import pytest

from mrmrfs.forest import (
    Forest, ForestParams, Tree, feature_importance, grow_tree, predict_proba, train_forest,
)
from mrmrfs.synth import SyntheticSpec, generate

from conftest import make_dataset


def entropy_bits(y):
    p = np.mean(y)
    return 0.0 if p in (0.0, 1.0) else -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def best_stump_gain(x, y, min_leaf=1):
    """Brute force over every threshold between distinct values."""
    vals = np.unique(x)
    best = 0.0
    for lo, hi in zip(vals[:-1], vals[1:]):
        t = (lo + hi) / 2
        left, right = y[x <= t], y[x > t]
        if len(left) < min_leaf or len(right) < min_leaf:
            continue
        g = entropy_bits(y) - (len(left) * entropy_bits(left) + len(right) * entropy_bits(right)) / len(y)
        best = max(best, g)
    return best


@pytest.fixture
def separable():
    # gap around 0 so any bootstrap threshold separates the classes
    x = np.concatenate([np.linspace(-1, -0.5, 20), np.linspace(0.5, 1, 20)])
    y = (x >= 0).astype(int)
    return make_dataset(x, y)


class TestTraining:
    def test_separable_stumps(self, separable):
        f = train_forest(separable, ForestParams(n_trees=7, max_depth=1, min_samples_leaf=1, seed=3))
        for tree in f.trees:
            assert tree.feature[0] == 0 and tree.n_splits == 1
        p = predict_proba(f, separable.features)
        np.testing.assert_array_equal(p, separable.labels)

    def test_pure_labels_give_leaf(self):
        x = np.random.default_rng(0).normal(size=(30, 2))
        tree = grow_tree(x, np.ones(30, dtype=int), ForestParams(min_samples_leaf=1),
                         np.random.default_rng(0))
        assert tree.n_splits == 0
        assert tree.predict_proba(x).tolist() == [1.0] * 30

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="single class"):
            from mrmrfs.forest import train_forest_arrays
            train_forest_arrays(np.zeros((10, 1)), np.zeros(10), ForestParams(min_samples_leaf=1))

    def test_informative_feature_dominates(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(400, 3))
        y = (x[:, 2] + 0.3 * rng.normal(size=400) > 0).astype(int)
        gains = [best_stump_gain(x[:, j], y) for j in range(3)]
        assert np.argmax(gains) == 2
        imp = train_forest(make_dataset(x, y), ForestParams(n_trees=20, min_samples_leaf=5, seed=1)).importance
        assert imp[2] > imp[0] and imp[2] > imp[1]

    def test_root_split_matches_brute_force(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(60, 1))
        y = (x[:, 0] + rng.normal(size=60) > 0.2).astype(int)
        tree = grow_tree(x, y, ForestParams(max_depth=1, min_samples_leaf=3, max_features="all"),
                         np.random.default_rng(0))
        assert tree.gain[0] == pytest.approx(best_stump_gain(x[:, 0], y, 3), abs=1e-12)

    def test_thresholds_inside_training_range(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(300, 4))
        y = (x[:, 0] * x[:, 1] > 0).astype(int)
        f = train_forest(make_dataset(x, y), ForestParams(n_trees=5, min_samples_leaf=5, seed=0))
        for t in f.trees:
            for node in np.flatnonzero(t.feature >= 0):
                col = x[:, t.feature[node]]
                assert col.min() <= t.threshold[node] < col.max()

    def test_deterministic(self, toy):
        p = ForestParams(n_trees=5, min_samples_leaf=2, seed=11)
        a, b = train_forest(toy, p), train_forest(toy, p)
        assert np.array_equal(a.importance, b.importance)
        assert np.array_equal(predict_proba(a, toy.features), predict_proba(b, toy.features))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ForestParams(n_trees=0)
        with pytest.raises(ValueError):
            ForestParams(max_features="half")
        assert ForestParams().n_candidates(70) == 8
        assert ForestParams(max_features="log2").n_candidates(70) == 6


class TestPrediction:
    def test_constant_model(self):
        f = Forest([Tree.leaf(0.7)], n_features=2)
        np.testing.assert_array_equal(predict_proba(f, np.zeros((4, 2))), [0.7] * 4)

    def test_averaging(self):
        def stump(left_value, right_value):
            return Tree(
                feature=np.array([0, -1, -1]), threshold=np.array([0.0, 0.0, 0.0]),
                left=np.array([1, -1, -1]), right=np.array([2, -1, -1]),
                value=np.array([0.5, left_value, right_value]), n_node=np.array([2, 1, 1]),
                gain=np.array([1.0, 0.0, 0.0]))
        f = Forest([stump(1.0, 0.0), stump(0.0, 1.0)], n_features=1)
        assert predict_proba(f, [[-1.0]]).tolist() == [0.5]

    def test_width_mismatch(self, toy):
        f = train_forest(toy, ForestParams(n_trees=2, min_samples_leaf=2))
        with pytest.raises(ValueError, match="columns"):
            predict_proba(f, np.zeros((3, 5)))

    def test_in_unit_interval(self, toy):
        f = train_forest(toy, ForestParams(n_trees=5, min_samples_leaf=2))
        p = predict_proba(f, np.random.default_rng(1).normal(size=(50, 3)) * 10)
        assert np.all((p >= 0) & (p <= 1))


class TestImportance:
    def test_one_hot_when_only_feature_zero_splits(self, separable):
        x = np.column_stack([separable.features[:, 0], np.zeros(separable.n)])
        f = train_forest(make_dataset(x, separable.labels),
                         ForestParams(n_trees=3, min_samples_leaf=1, max_features="all"))
        np.testing.assert_array_equal(feature_importance(f), [1.0, 0.0])

    def test_sums_to_one(self, toy):
        f = train_forest(toy, ForestParams(n_trees=10, min_samples_leaf=2, seed=4))
        assert abs(feature_importance(f).sum() - 1.0) <= 1e-9

    def test_zero_split_forest(self):
        f = Forest([Tree.leaf(0.3)], n_features=3)
        np.testing.assert_array_equal(feature_importance(f), np.zeros(3))

    def test_irrelevant_below_informative_median(self):
        data, truth = generate(SyntheticSpec(n=4000, seed=21))
        imp = train_forest(data, ForestParams(n_trees=20, seed=21)).importance
        med = np.median(imp[truth.indices("informative")])
        assert np.all(imp[truth.indices("irrelevant")] < med)

    def test_permuting_irrelevant_feature_barely_moves_auc(self):
        from mrmrfs.dataset import split
        from mrmrfs.metrics import auc
        data, truth = generate(SyntheticSpec(n=3000, seed=4))
        train, test = split(data, 0.5, 4)
        f = train_forest(train, ForestParams(n_trees=20, seed=4))
        base = auc(predict_proba(f, test.features), test.labels)
        j = truth.indices("irrelevant")[0]
        x = np.array(test.features)
        x[:, j] = np.random.default_rng(0).permutation(x[:, j])
        assert abs(auc(predict_proba(f, x), test.labels) - base) < 0.01
