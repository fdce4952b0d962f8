import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mrmrfs.measures import (
    F_CAP, MeasureError, RdcParams, contingency_table, copula_transform, discretize,
    f_statistic, f_statistic_score, max_canonical_correlation, mutual_information,
    mutual_information_from_table, pearson, pearson_score, rdc,
)

from oracles import mi_from_pairs, mi_from_table, pearson_loops

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestPearson:
    @pytest.mark.parametrize("x, y, expected", [
        ([1, 2, 3], [1, 2, 3], 1.0),
        ([1, 2, 3], [3, 2, 1], -1.0),
        ([1, 2, 3, 4], [1, 3, 2, 4], 0.8),  # cov 4 / sqrt(5 * 5)
    ])
    def test_examples(self, x, y, expected):
        assert pearson(x, y) == pytest.approx(expected, abs=1e-12)

    def test_constant_is_zero_and_flagged(self):
        s = pearson_score([1, 1, 1], [1, 2, 3])
        assert s.value == 0.0 and s.degenerate

    def test_length_mismatch(self):
        with pytest.raises(MeasureError):
            pearson([1, 2], [1, 2, 3])

    def test_matches_loop_oracle(self, rng):
        x, y = rng.normal(size=50), rng.normal(size=50)
        assert pearson(x, y) == pytest.approx(pearson_loops(x.tolist(), y.tolist()), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, 20, elements=finite), arrays(float, 20, elements=finite),
           st.floats(0.1, 100), st.floats(-100, 100))
    def test_affine_invariance(self, x, y, a, b):
        r = pearson(x, y)
        if pearson_score(x, y).degenerate or np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
            return
        assert pearson(a * x + b, y) == pytest.approx(r, abs=1e-7)
        assert pearson(-a * x + b, y) == pytest.approx(-r, abs=1e-7)


class TestMutualInformation:
    def test_identical_binary(self):
        assert mutual_information([0, 1, 0, 1], [0, 1, 0, 1]) == pytest.approx(math.log(2), abs=1e-12)

    def test_independent(self):
        assert mutual_information([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)

    def test_six_point_table(self):
        x = [0, 0, 0, 0, 1, 1]
        y = [0, 0, 0, 1, 0, 1]
        # 0.5 ln(9/8) + (1/3) ln(3/4) + (1/6) ln(3/2)
        assert mutual_information(x, y) == pytest.approx(0.030575011695625487, abs=1e-12)
        assert mutual_information(x, y) == pytest.approx(
            mi_from_pairs(list(zip(x, y))), abs=1e-12)

    def test_random_tables_match_enumeration(self, rng):
        for _ in range(20):
            table = rng.integers(0, 6, size=(rng.integers(2, 5), rng.integers(2, 5)))
            table[0, 0] += 1
            assert mutual_information_from_table(table) == pytest.approx(
                mi_from_table(table), abs=1e-10)

    def test_discretize_keeps_discrete_columns(self):
        np.testing.assert_array_equal(discretize([5, 7, 5, 9]), [0, 1, 0, 2])

    def test_discretize_equal_frequency(self):
        codes = discretize(np.arange(100.0), bins=10)
        assert np.bincount(codes).tolist() == [10] * 10

    def test_contingency_marginals(self, rng):
        a = rng.integers(0, 3, 30)
        b = rng.integers(0, 4, 30)
        t = contingency_table(a, b)
        assert t.sum() == 30
        np.testing.assert_array_equal(t.sum(axis=1), np.bincount(a, minlength=t.shape[0]))

    def test_length_mismatch(self):
        with pytest.raises(MeasureError):
            mutual_information([0, 1], [0, 1, 0])

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, 40, elements=finite), arrays(float, 40, elements=finite),
           st.integers(2, 12))
    def test_symmetric_and_nonnegative(self, x, y, bins):
        a = mutual_information(x, y, bins)
        assert a == mutual_information(y, x, bins)
        assert a >= 0.0

    @settings(max_examples=40, deadline=None)
    @given(arrays(int, 60, elements=st.integers(-50, 50)),
           arrays(int, 60, elements=st.integers(-50, 50)))
    def test_monotone_transform_invariance(self, x, y):
        # integer grid keeps both transforms strictly monotone in floating point
        x = x / 10.0
        assert mutual_information(np.exp(x), y) == mutual_information(x, y)
        assert mutual_information(x ** 3 + 2, y) == mutual_information(x, y)


class TestFStatistic:
    def test_hand_anova(self):
        x = [1, 2, 3, 4, 5, 6]
        y = [0, 0, 0, 1, 1, 1]
        # SS_between = 13.5 on 1 df, SS_within = 4 on 4 df
        assert f_statistic(x, y) == pytest.approx(13.5, abs=1e-9)

    def test_equal_means(self):
        assert f_statistic([1, 3, 1, 3], [0, 0, 1, 1]) == 0.0

    def test_constant_feature(self):
        s = f_statistic_score([2, 2, 2, 2], [0, 1, 0, 1])
        assert s.value == 0.0 and s.degenerate

    def test_zero_within_variance_cap(self):
        assert f_statistic([1, 1, 2, 2], [0, 0, 1, 1]) == F_CAP

    def test_single_class(self):
        with pytest.raises(MeasureError):
            f_statistic([1, 2, 3], [1, 1, 1])

    def test_matches_scipy(self, rng):
        from scipy.stats import f_oneway
        x = rng.normal(size=80)
        y = rng.integers(0, 2, 80)
        assert f_statistic(x, y) == pytest.approx(f_oneway(x[y == 0], x[y == 1]).statistic, rel=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(arrays(float, 30, elements=st.floats(-100, 100, allow_nan=False)),
           st.floats(0.5, 50), st.floats(-50, 50))
    def test_affine_invariance(self, x, a, b):
        y = np.arange(30) % 2
        if np.ptp(x) < 1e-2:
            return
        assert f_statistic(a * x + b, y) == pytest.approx(f_statistic(x, y), rel=1e-6)


class TestCopula:
    def test_ranks(self):
        np.testing.assert_allclose(copula_transform([10, 30, 20]), [1 / 3, 1, 2 / 3])

    def test_ties(self):
        np.testing.assert_allclose(copula_transform([5, 5]), [0.75, 0.75])

    def test_monotone(self, rng):
        u = copula_transform(np.sort(rng.normal(size=30)) + np.arange(30))
        assert np.all(np.diff(u) > 0)
        assert u.min() > 0 and u.max() == 1.0


class TestCanonicalCorrelation:
    def test_self(self, rng):
        a = rng.normal(size=(200, 3))
        assert max_canonical_correlation(a, a) == pytest.approx(1.0, abs=1e-6)

    def test_independent_noise(self, rng):
        a = rng.normal(size=(5000, 3))
        b = rng.normal(size=(5000, 3))
        assert max_canonical_correlation(a, b) < 0.15

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, 25, elements=finite), arrays(float, 25, elements=finite))
    def test_one_dimensional_is_abs_pearson(self, x, y):
        assert max_canonical_correlation(x, y) == pytest.approx(abs(pearson(x, y)), abs=1e-10)

    def test_collinear_block_is_regularized(self, rng):
        a = rng.normal(size=(100, 1))
        a2 = np.hstack([a, 2 * a])
        val = max_canonical_correlation(a2, a)
        assert 0.999 < val <= 1.0


class TestRdc:
    def test_identical(self, rng):
        x = rng.normal(size=500)
        assert rdc(x, x, RdcParams(seed=1)) >= 0.99

    def test_independent_normals(self):
        r = np.random.default_rng(7)
        assert rdc(r.normal(size=2000), r.normal(size=2000), RdcParams(seed=7)) <= 0.2

    def test_square(self):
        r = np.random.default_rng(3)
        x = r.uniform(-1, 1, 2000)
        assert rdc(x, x ** 2, RdcParams(seed=3)) >= 0.7
        assert abs(pearson(x, x ** 2)) <= 0.1

    def test_deterministic_per_seed(self, rng):
        x, y = rng.normal(size=100), rng.normal(size=100)
        assert rdc(x, y, RdcParams(seed=4)) == rdc(x, y, RdcParams(seed=4))

    def test_too_few_samples(self):
        with pytest.raises(MeasureError, match="k \\+ 2"):
            rdc([1, 2, 3], [3, 2, 1], RdcParams(k=5))

    def test_bad_params(self):
        with pytest.raises(ValueError):
            RdcParams(k=0)
        with pytest.raises(ValueError):
            RdcParams(s=0)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000))
    def test_monotone_invariance(self, seed):
        r = np.random.default_rng(seed)
        x = r.normal(size=300)
        y = x + r.normal(size=300)
        p = RdcParams(seed=seed, repetitions=5)
        assert rdc(np.exp(x), y ** 3, p) == pytest.approx(rdc(x, y, p), abs=0.05)
