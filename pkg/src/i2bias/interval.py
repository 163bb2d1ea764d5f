"""Test-based 95% confidence interval for I^2.

The interval is built for ln H, H = sqrt(Q/df), using a standard error that
switches form at Q = K (= df + 1):

    Q > K:   SE = (ln Q - ln df) / (2 * (sqrt(2Q) - sqrt(2df - 1)))
    Q <= K:  SE = sqrt(1/(2(df-1)) * (1 - 1/(3(df-1)^2)))

Each endpoint of exp(ln H -/+ 1.96 SE) is mapped through (H^2 - 1)/H^2 and
clipped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

Z_95 = 1.96
Q_FLOOR = 1e-12  # stand-in for Q = 0, where ln H diverges


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lower: float
    upper: float
    level: float = 0.95
    degenerate: bool = False


def se_log_h(q, df):
    """Standard error of ln H, elementwise over ``q``."""
    q = np.asarray(q, dtype=float)
    small = math.sqrt(1.0 / (2.0 * (df - 1)) * (1.0 - 1.0 / (3.0 * (df - 1) ** 2)))
    big = q > df + 1
    qb = np.where(big, q, df + 2.0)  # dummy value keeps the unused branch finite
    large = 0.5 * (np.log(qb) - math.log(df)) / (np.sqrt(2.0 * qb) - math.sqrt(2.0 * df - 1.0))
    return np.where(big, large, small)


def _to_i2(h):
    return np.clip((h * h - 1.0) / (h * h), 0.0, 1.0)


def interval_bounds(q, df):
    """Lower and upper I^2 bounds, elementwise over an array of Q values."""
    if df < 2:
        raise DomainError(f"the I^2 interval needs df >= 2, got {df}")
    q = np.maximum(np.asarray(q, dtype=float), Q_FLOOR)
    log_h = 0.5 * (np.log(q) - math.log(df))
    half_width = Z_95 * se_log_h(q, df)
    return _to_i2(np.exp(log_h - half_width)), _to_i2(np.exp(log_h + half_width))


def i2_confidence_interval(q: float, df: int) -> IntervalEstimate:
    """95% interval for I^2 from Cochran's Q and its degrees of freedom.

    Q = 0 is evaluated at a tiny floor and flagged ``degenerate``.
    """
    if not (q >= 0 and math.isfinite(q)):
        raise DomainError(f"Q must be finite and >= 0, got {q}")
    if int(df) != df:
        raise DomainError(f"df must be an integer, got {df}")
    lower, upper = interval_bounds(q, df)
    point = max(0.0, 1.0 - df / q) if q > 0 else 0.0
    return IntervalEstimate(point=point, lower=float(lower), upper=float(upper),
                            degenerate=(q == 0))
