import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from i2bias.errors import DomainError, InsufficientDataError
from i2bias.meta import (MetaAnalysis, Study, TruePopulation, analyze, cochran_q, i2_from_q, i2_hat,
                         noncentrality_equal_sigma, noncentrality_general, pooled_effect,
                         q_statistic)


def ma(effects, std_errs):
    return MetaAnalysis.from_arrays(effects, std_errs)


class TestPooledEffect:
    def test_equal_weights(self):
        assert pooled_effect(ma([0, 1], [1, 1])) == 0.5

    def test_unequal_weights(self):
        # (0*1 + 1*0.25) / 1.25
        assert pooled_effect(ma([0, 1], [1, 2])) == pytest.approx(0.2, abs=1e-15)

    def test_singleton(self):
        assert pooled_effect(ma([3.7], [0.4])) == 3.7

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            pooled_effect(MetaAnalysis([]))


class TestCochranQ:
    def test_two_studies(self):
        assert cochran_q(ma([0, 1], [1, 1])) == pytest.approx(0.5, abs=1e-15)

    def test_three_studies(self):
        assert cochran_q(ma([0, 1, 2], [1, 1, 1])) == pytest.approx(2.0, abs=1e-15)

    def test_identical_effects_exactly_zero(self):
        assert cochran_q(ma([0.1] * 5, [0.3, 0.2, 0.7, 1.0, 2.0])) == 0.0

    def test_too_few(self):
        with pytest.raises(InsufficientDataError):
            cochran_q(ma([1.0], [1.0]))

    def test_batch_kernel_matches_scalar(self):
        rng = np.random.default_rng(3)
        effects = rng.normal(size=(20, 6))
        se = rng.uniform(0.2, 2.0, size=6)
        batch = q_statistic(effects, se)
        for row, q in zip(effects, batch):
            assert q == pytest.approx(cochran_q(ma(row, se)), rel=1e-12)


class TestI2Hat:
    @pytest.mark.parametrize("df", [1, 4, 30])
    def test_boundary(self, df):
        assert i2_hat(float(df), df) == (0.0, 0.0)

    def test_below_df(self):
        assert i2_hat(0.5, 1) == (-1.0, 0.0)

    @pytest.mark.parametrize("df", [1, 4, 30])
    def test_twice_df(self, df):
        assert i2_hat(2.0 * df, df) == (0.5, 0.5)

    def test_zero_q(self):
        raw, rounded = i2_hat(0.0, 3)
        assert math.isnan(raw) and rounded == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            i2_hat(1.0, 0)
        with pytest.raises(DomainError):
            i2_hat(-1.0, 2)

    def test_vectorised(self):
        raw, rounded = i2_from_q(np.array([0.0, 1.0, 4.0, 8.0]), 4)
        assert math.isnan(raw[0])
        np.testing.assert_array_equal(raw[1:], [-3.0, 0.0, 0.5])
        np.testing.assert_array_equal(rounded, [0.0, 0.0, 0.0, 0.5])


class TestNoncentrality:
    def test_general(self):
        assert noncentrality_general([0, 1], [1, 1]) == pytest.approx(0.5)
        assert noncentrality_general([2, 2, 2], [1, 3, 5]) == 0.0
        assert noncentrality_general([0, 2], [1, 2]) == pytest.approx(1.25)

    def test_general_uses_simple_mean(self):
        # weighted mean would be 0.2 and give a different value
        assert noncentrality_general([0, 1], [1, 2]) == pytest.approx(0.25 + 0.0625)

    def test_general_errors(self):
        with pytest.raises(DomainError):
            noncentrality_general([0, 1, 2], [1, 1])

    @pytest.mark.parametrize("k", [2, 7, 50])
    def test_equal_sigma_zero(self, k):
        assert noncentrality_equal_sigma(k, 0.0) == 0.0

    def test_equal_sigma_values(self):
        assert noncentrality_equal_sigma(7, 0.5) == pytest.approx(7.0)
        assert noncentrality_equal_sigma(10, 0.2) == pytest.approx(2.5)

    def test_equal_sigma_domain(self):
        with pytest.raises(DomainError):
            noncentrality_equal_sigma(5, 1.0)

    def test_general_agrees_with_equal_sigma(self):
        # K effects whose squared deviations sum to K*tau2, sigma = 1.5
        k, tau2, sigma = 4, 0.3, 1.5
        d = math.sqrt(tau2)
        i2 = TruePopulation.from_tau2(tau2, sigma).i2_true
        lam = noncentrality_general([-d, -d, d, d], [sigma] * k)
        assert lam == pytest.approx(noncentrality_equal_sigma(k, i2), rel=1e-12)


class TestTruePopulation:
    def test_round_trip(self):
        p = TruePopulation.from_i2(0.4, 2.0)
        assert p.tau2 == pytest.approx(4.0 * 0.4 / 0.6)
        assert TruePopulation.from_tau2(p.tau2, 2.0).i2_true == pytest.approx(0.4)


class TestAnalyze:
    def test_two_studies(self):
        r = analyze(ma([0, 1], [1, 1]))
        assert (r.q_stat, r.df, r.i2) == (0.5, 1, 0.0)
        assert r.i2_raw == pytest.approx(-1.0)
        # survival of chi-square(1) at 0.5 = erfc(1/2)
        assert r.p_value == pytest.approx(math.erfc(0.5), rel=1e-12)

    def test_identical(self):
        r = analyze(ma([2.0] * 5, [1.0] * 5))
        assert r.q_stat == 0.0 and r.i2 == 0.0 and r.p_value == 1.0
        assert not r.i2_raw_defined

    def test_three(self):
        r = analyze(ma([0, 1, 2], [1, 1, 1]))
        assert r.q_stat == pytest.approx(2.0) and r.df == 2
        assert r.i2_raw == pytest.approx(0.0, abs=1e-15) and r.i2 == 0.0
        assert r.p_value == pytest.approx(math.exp(-1), rel=1e-12)

    def test_accepts_study_list(self):
        r = analyze([Study("a", 0, 1), Study("b", 1, 1)])
        assert r.k == 2

    def test_too_few(self):
        with pytest.raises(InsufficientDataError):
            analyze([Study("a", 0, 1)])

    def test_bad_study(self):
        with pytest.raises(DomainError):
            Study("x", 1.0, 0.0)
        with pytest.raises(DomainError):
            Study("x", math.inf, 1.0)


effects_st = st.floats(-50, 50, allow_nan=False)
se_st = st.floats(0.05, 20, allow_nan=False)


@st.composite
def meta_data(draw):
    k = draw(st.integers(2, 12))
    return (draw(st.lists(effects_st, min_size=k, max_size=k)),
            draw(st.lists(se_st, min_size=k, max_size=k)))


class TestProperties:
    @given(meta_data(), st.floats(0.01, 100))
    @settings(max_examples=200, deadline=None)
    def test_scale_invariance(self, data, c):
        e, s = data
        base = analyze(ma(e, s))
        scaled = analyze(ma([c * x for x in e], [c * x for x in s]))
        assert scaled.q_stat == pytest.approx(base.q_stat, rel=1e-9, abs=1e-9)
        assert scaled.i2 == pytest.approx(base.i2, abs=1e-9)
        assert scaled.p_value == pytest.approx(base.p_value, rel=1e-7, abs=1e-12)
        assert scaled.pooled_effect == pytest.approx(c * base.pooled_effect, rel=1e-9, abs=1e-9)

    @given(meta_data(), st.floats(-100, 100))
    @settings(max_examples=200, deadline=None)
    def test_location_invariance(self, data, shift):
        e, s = data
        base = analyze(ma(e, s))
        moved = analyze(ma([x + shift for x in e], s))
        assert moved.q_stat == pytest.approx(base.q_stat, rel=1e-8, abs=1e-8)
        assert moved.pooled_effect == pytest.approx(base.pooled_effect + shift, abs=1e-9)

    @given(meta_data(), st.randoms(use_true_random=False))
    @settings(max_examples=200, deadline=None)
    def test_order_independence(self, data, rnd):
        e, s = data
        idx = list(range(len(e)))
        rnd.shuffle(idx)
        a = analyze(ma(e, s))
        b = analyze(ma([e[i] for i in idx], [s[i] for i in idx]))
        assert (a.q_stat, a.pooled_effect, a.i2, a.p_value) == (b.q_stat, b.pooled_effect, b.i2, b.p_value)

    @given(meta_data())
    @settings(max_examples=200, deadline=None)
    def test_zero_iff_q_at_most_df(self, data):
        r = analyze(ma(*data))
        assert (r.i2 == 0.0) == (r.q_stat <= r.df)
        assert r.i2 == max(0.0, r.i2_raw) or not r.i2_raw_defined
        assert 0.0 <= r.i2 < 1.0
