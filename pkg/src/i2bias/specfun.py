"""Gamma-family special functions and the (noncentral) chi-square law.

Everything here works on Python floats.  Quantities that can under- or
overflow are carried as logarithms until the last step, which keeps the
chi-square functions usable for several hundred degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

EPS = 1e-14          # term-ratio stopping rule for series / continued fraction
MIXTURE_TOL = 1e-13  # Poisson-mixture truncation, relative to the running sum
MAX_ITER = 100_000
_TINY = 1e-300
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChiSquareParams:
    """Degrees of freedom and noncentrality; ``lam == 0`` is the central law."""

    df: float
    lam: float = 0.0

    def __post_init__(self):
        if not (self.df > 0 and math.isfinite(self.df)):
            raise DomainError(f"df must be positive and finite, got {self.df}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"noncentrality must be >= 0 and finite, got {self.lam}")


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _check_gamma_args(a, x):
    if not a > 0:
        raise DomainError(f"incomplete gamma requires a > 0, got {a}")
    if not x >= 0:
        raise DomainError(f"incomplete gamma requires x >= 0, got {x}")


def _lower_series(a, x):
    """P(a, x) by the power series; converges quickly for x < a + 1."""
    ap = a
    term = total = 1.0 / a
    for _ in range(MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            break
    else:
        raise ArithmeticError(f"gamma series did not converge for a={a}, x={x}")
    return math.exp(a * math.log(x) - x - math.lgamma(a) + math.log(total))


def _upper_cf(a, x):
    """Q(a, x) by modified Lentz evaluation of the continued fraction; x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    else:
        raise ArithmeticError(f"gamma continued fraction did not converge for a={a}, x={x}")
    return math.exp(a * math.log(x) - x - math.lgamma(a)) * h


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    _check_gamma_args(a, x)
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _lower_series(a, x)
    return 1.0 - _upper_cf(a, x)


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    _check_gamma_args(a, x)
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_series(a, x)
    return _upper_cf(a, x)


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Non-regularized upper incomplete gamma, the integral of t**(a-1) e**-t over [x, inf)."""
    q = gamma_q(a, x)
    if q == 0.0:
        return 0.0
    return math.exp(math.lgamma(a) + math.log(q))


# -- chi-square -------------------------------------------------------------

def _central_log_pdf(q, df):
    half = 0.5 * df
    return (half - 1.0) * math.log(q) - 0.5 * q - half * _LN2 - math.lgamma(half)


def _central_pdf(q, df):
    if q == 0:
        if df < 2:
            return math.inf
        return 0.5 if df == 2 else 0.0
    return math.exp(_central_log_pdf(q, df))


def _log_poisson(j, mu):
    if mu == 0:
        return 0.0 if j == 0 else -math.inf
    return -mu + j * math.log(mu) - math.lgamma(j + 1.0)


def _log_geometric_tail(log_t, r):
    """Log of t*r/(1-r): bound on a tail whose term ratios are all <= r."""
    if r <= 0.0:
        return -math.inf
    if r >= 1.0:
        return math.inf
    return log_t + math.log(r) - math.log1p(-r)


def _mixture(log_term, tail_up, tail_down, mu):
    """Sum a Poisson mixture outward from the Poisson mode.

    ``log_term(j)`` is the log of the j-th summand.  ``tail_up(j, lt)`` and
    ``tail_down(j, lt)`` return the log of a bound on all terms beyond j in
    that direction, given ``lt = log_term(j)``, or inf when no bound holds
    yet.  Returns the log of the sum.
    """
    j0 = int(math.floor(mu))
    ref = log_term(j0)
    if ref == -math.inf:
        # mode term underflowed; move the reference to the first finite term
        for j in range(max(j0 - 2000, 0), j0 + 2000):
            ref = log_term(j)
            if ref > -math.inf:
                j0 = j
                break
        else:
            return -math.inf
    total = 1.0  # sum in units of exp(ref)

    def add(lt):
        nonlocal ref, total
        if lt > ref:
            total = total * math.exp(ref - lt) + 1.0
            ref = lt
        else:
            total += math.exp(lt - ref)

    def small(log_bound):
        return log_bound < ref + math.log(MIXTURE_TOL * total)

    j = j0
    for _ in range(MAX_ITER):
        j += 1
        lt = log_term(j)
        add(lt)
        if small(tail_up(j, lt)):
            break
    else:
        raise ArithmeticError("Poisson mixture did not converge")
    j = j0
    while j > 0:
        j -= 1
        lt = log_term(j)
        add(lt)
        if small(tail_down(j, lt)):
            break
    return ref + math.log(total)


def chisq_pdf(q: float, p: ChiSquareParams) -> float:
    """Chi-square density at ``q``; a Poisson mixture of central densities when ``p.lam > 0``."""
    if not q >= 0:
        raise DomainError(f"chi-square argument must be >= 0, got {q}")
    if p.lam == 0:
        return _central_pdf(q, p.df)
    if q == 0:
        return _central_pdf(0.0, p.df) * math.exp(-0.5 * p.lam)
    mu = 0.5 * p.lam
    df = p.df

    def log_term(j):
        return _log_poisson(j, mu) + _central_log_pdf(q, df + 2 * j)

    # term(j+1)/term(j) = mu*q / ((j+1)(df+2j)), which falls as j grows
    def tail_up(j, lt):
        return _log_geometric_tail(lt, mu * q / ((j + 1.0) * (df + 2.0 * j)))

    def tail_down(j, lt):
        return _log_geometric_tail(lt, j * (df + 2.0 * j - 2.0) / (mu * q))

    return math.exp(_mixture(log_term, tail_up, tail_down, mu))


def chisq_sf(q: float, p: ChiSquareParams) -> float:
    """Survival function P(X > q)."""
    if not q >= 0:
        raise DomainError(f"chi-square argument must be >= 0, got {q}")
    if q == 0:
        return 1.0
    if p.lam == 0:
        return gamma_q(0.5 * p.df, 0.5 * q)
    mu = 0.5 * p.lam
    half_q = 0.5 * q
    df = p.df

    def log_term(j):
        s = gamma_q(0.5 * df + j, half_q)
        return _log_poisson(j, mu) + (math.log(s) if s > 0 else -math.inf)

    # components increase with j but never exceed 1: bound by the Poisson tail
    def tail_up(j, lt):
        return _log_geometric_tail(_log_poisson(j, mu), mu / (j + 1.0))

    # components decrease as j falls, so the weight ratio j/mu bounds the terms
    def tail_down(j, lt):
        return _log_geometric_tail(lt, j / mu)

    return min(1.0, math.exp(_mixture(log_term, tail_up, tail_down, mu)))


def chisq_cdf(q: float, p: ChiSquareParams) -> float:
    """P(X <= q)."""
    if p.lam == 0 and q >= 0:
        return gamma_p(0.5 * p.df, 0.5 * q)
    return 1.0 - chisq_sf(q, p)
