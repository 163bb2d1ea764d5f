import math

import pytest
from scipy import special

from i2bias.bias import (BiasQuery, Method, bias_curve, bias_point, expectation_closed_form,
                         expectation_quadrature)
from i2bias.errors import DomainError, QuadratureError
from i2bias.meta import noncentrality_equal_sigma


class TestClosedForm:
    @pytest.mark.parametrize("df, lo, hi", [
        (4, 0.1345, 0.1355),   # K = 5, reported .135
        (6, 0.1240, 0.1250),   # K = 7, reported .124
        (9, 0.1115, 0.1125),   # K = 10, reported .11
        (49, 0.055, 0.065),    # K = 50, reported .06
    ])
    def test_reported_values(self, df, lo, hi):
        assert lo <= expectation_closed_form(df) <= hi

    def test_df4_is_exp_minus_2(self):
        # a = 2: (4/e^2 - 3/e^2) / (1 * Gamma(2))
        assert expectation_closed_form(4) == pytest.approx(math.exp(-2), rel=1e-13)

    def test_df6_exact(self):
        # a = 3: (27 - 17) e^-3 / (2 * Gamma(3))
        assert expectation_closed_form(6) == pytest.approx(2.5 * math.exp(-3), rel=1e-13)

    @pytest.mark.parametrize("df", [1, 2, 0])
    def test_rejects_small_df(self, df):
        with pytest.raises(DomainError):
            expectation_closed_form(df)

    def test_strictly_decreasing(self):
        vals = [expectation_closed_form(df) for df in range(3, 501)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert all(0 < v < 1 for v in vals)


class TestQuadrature:
    def test_df2_exponential_integral(self):
        oracle = math.exp(-1) - special.exp1(1.0)
        assert oracle == pytest.approx(0.148495506775922, abs=1e-14)
        assert expectation_quadrature(2, 0.0) == pytest.approx(oracle, abs=1e-9)

    @pytest.mark.parametrize("df", [3, 4, 10, 57, 200])
    def test_matches_closed_form(self, df):
        assert abs(expectation_quadrature(df, 0.0) - expectation_closed_form(df)) < 1e-8

    @pytest.mark.parametrize("df", [1, 2, 6, 24])
    def test_increasing_in_lambda(self, df):
        vals = [expectation_quadrature(df, lam) for lam in [0, 0.1, 0.5, 1, 2, 5, 10, 30, 100]]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(0 < v < 1 for v in vals)

    def test_small_heterogeneity_k7(self):
        lam = noncentrality_equal_sigma(7, 0.05)
        e = expectation_quadrature(6, lam)
        # expectation rises above the homogeneous value, the bias falls below it
        assert e > expectation_closed_form(6)
        assert e - 0.05 < expectation_closed_form(6)

    def test_budget_failure_is_explicit(self):
        with pytest.raises(QuadratureError):
            expectation_quadrature(6, 3.0, abs_tol=1e-30)


class TestBiasPoint:
    def test_routing(self):
        assert bias_point(BiasQuery(7, 0.0)).method is Method.CLOSED_FORM
        assert bias_point(BiasQuery(3, 0.0)).method is Method.QUADRATURE
        assert bias_point(BiasQuery(7, 0.1)).method is Method.QUADRATURE

    def test_headline(self):
        p = bias_point(BiasQuery(7, 0.0))
        assert p.bias == p.expectation == pytest.approx(0.12447, abs=5e-5)

    def test_bias_definition(self):
        for i2 in [0.0, 0.05, 0.5, 0.9]:
            p = bias_point(BiasQuery(10, i2))
            assert p.bias == p.expectation - i2

    def test_no_bias_at_02_for_large_k(self):
        assert abs(bias_point(BiasQuery(100, 0.2)).bias) < 0.01

    def test_negative_at_half(self):
        assert bias_point(BiasQuery(10, 0.5)).bias < 0

    @pytest.mark.parametrize("k, i2", [(1, 0.0), (5, 1.0), (5, -0.1), (2.5, 0.1)])
    def test_invalid_query(self, k, i2):
        with pytest.raises(DomainError):
            BiasQuery(k, i2)


class TestBiasCurve:
    def test_homogeneous_curve(self):
        curve = bias_curve(0.0, 5, 50)
        assert [p.query.k for p in curve] == list(range(5, 51))
        assert curve[0].expectation == pytest.approx(0.135, abs=5e-4)
        assert curve[-1].expectation == pytest.approx(0.06, abs=5e-3)
        e = [p.expectation for p in curve]
        steps = [a - b for a, b in zip(e, e[1:])]
        assert all(s > 0 for s in steps)
        # shrinks at a decreasing rate
        assert all(b < a for a, b in zip(steps, steps[1:]))

    def test_high_i2_negligible(self):
        assert all(abs(p.bias) <= 0.01 for p in bias_curve(0.8, 10, 60))

    def test_degenerate_range(self):
        assert len(bias_curve(0.3, 8, 8)) == 1

    def test_invalid_range(self):
        with pytest.raises(DomainError):
            bias_curve(0.0, 10, 9)
        with pytest.raises(DomainError):
            bias_curve(0.0, 1, 9)

    def test_deterministic(self):
        assert bias_curve(0.4, 2, 12) == bias_curve(0.4, 2, 12)
