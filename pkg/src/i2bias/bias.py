"""Expectation and bias of the zero-truncated I^2 estimator.

Under homogeneity Q is central chi-square and the expectation has a closed
form in terms of the upper incomplete gamma function.  Under heterogeneity Q
is noncentral chi-square with noncentrality K*I^2/(1 - I^2), and the
expectation is the integral of (1 - df/q) times the density over q > df
(values of Q below df contribute zero because the estimate is truncated
there).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .meta import noncentrality_equal_sigma
from .quadrature import integrate_to_infinity
from .specfun import ChiSquareParams, chisq_pdf, gamma_q

QUAD_TOL = 1e-10


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class BiasQuery:
    k: int
    i2_true: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")
        if not 0.0 <= self.i2_true < 1.0:
            raise DomainError(f"I^2 must lie in [0, 1), got {self.i2_true}")

    @property
    def df(self) -> int:
        return self.k - 1

    @property
    def lam(self) -> float:
        return noncentrality_equal_sigma(self.k, self.i2_true)


@dataclass(frozen=True)
class BiasPoint:
    query: BiasQuery
    expectation: float
    bias: float
    method: Method


def expectation_closed_form(df: int) -> float:
    """E[max(0, 1 - df/Q)] for Q ~ chi-square(df), df >= 3.

    Evaluates

        df/(df-2) * ((df/(2e))**(df/2) - G(df/2, df/2)) / Gamma(df/2 + 1)

    with G the upper incomplete gamma.  Both numerator terms are divided
    by Gamma(df/2 + 1) in log space; the second becomes Q(a, a)/a with Q
    the regularized upper gamma, so nothing overflows for large df.
    """
    if int(df) != df or df < 3:
        raise DomainError(f"closed form needs integer df >= 3, got {df}; use expectation_quadrature")
    a = 0.5 * df
    power_term = math.exp(a * math.log(a) - a - math.lgamma(a + 1.0))
    gamma_term = gamma_q(a, a) / a
    return df / (df - 2.0) * (power_term - gamma_term)


def _scale(df, lam):
    # spread of Q above df; keeps the mapped integrand from piling up near t = 1
    return math.sqrt(2.0 * df + 4.0 * lam) + lam


def expectation_quadrature(df: int, lam: float, *, abs_tol: float = QUAD_TOL) -> float:
    """Integral of (1 - df/q) f(q; df, lam) over q > df by adaptive quadrature.

    Raises QuadratureError if the integrator's panel budget runs out.
    """
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    params = ChiSquareParams(df, lam)

    def integrand(q):
        return (1.0 - df / q) * chisq_pdf(q, params)

    value, _ = integrate_to_infinity(integrand, float(df), scale=_scale(df, lam), abs_tol=abs_tol)
    return value


def bias_point(query: BiasQuery) -> BiasPoint:
    if query.i2_true == 0 and query.df >= 3:
        e = expectation_closed_form(query.df)
        method = Method.CLOSED_FORM
    else:
        e = expectation_quadrature(query.df, query.lam)
        method = Method.QUADRATURE
    return BiasPoint(query, e, e - query.i2_true, method)


def bias_curve(i2_true: float, k_min: int, k_max: int) -> list[BiasPoint]:
    """One BiasPoint per K in [k_min, k_max], in increasing K."""
    if not 2 <= k_min <= k_max:
        raise DomainError(f"need 2 <= k_min <= k_max, got {k_min}..{k_max}")
    return [bias_point(BiasQuery(k, i2_true)) for k in range(k_min, k_max + 1)]
