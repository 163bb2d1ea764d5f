"""Study data model and the heterogeneity estimator pipeline.

The array kernels (:func:`q_statistic`, :func:`i2_from_q`) reduce over the
last axis and broadcast over any leading ones, so the simulator can push a
whole batch of replicated meta-analyses through the same code path that
:func:`analyze` uses for one observed data set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError
from .specfun import ChiSquareParams, chisq_sf


@dataclass(frozen=True)
class Study:
    id: str
    effect: float
    std_err: float

    def __post_init__(self):
        if not math.isfinite(self.effect):
            raise DomainError(f"study {self.id!r}: effect must be finite")
        if not (self.std_err > 0 and math.isfinite(self.std_err)):
            raise DomainError(f"study {self.id!r}: std_err must be positive and finite")


@dataclass(frozen=True)
class MetaAnalysis:
    studies: tuple[Study, ...]

    def __init__(self, studies: Iterable[Study]):
        object.__setattr__(self, "studies", tuple(studies))

    @classmethod
    def from_arrays(cls, effects, std_errs, ids=None) -> "MetaAnalysis":
        effects = list(effects)
        std_errs = list(std_errs)
        if len(effects) != len(std_errs):
            raise DomainError("effects and std_errs differ in length")
        if ids is None:
            ids = [str(i + 1) for i in range(len(effects))]
        return cls(Study(str(i), float(e), float(s)) for i, e, s in zip(ids, effects, std_errs))

    def __len__(self):
        return len(self.studies)

    @property
    def k(self) -> int:
        return len(self.studies)

    @property
    def effects(self) -> np.ndarray:
        return np.array([s.effect for s in self.studies], dtype=float)

    @property
    def std_errs(self) -> np.ndarray:
        return np.array([s.std_err for s in self.studies], dtype=float)


@dataclass(frozen=True)
class HeterogeneityReport:
    """Result of :func:`analyze`.

    ``i2_raw`` is NaN when Q is exactly zero (1 - df/Q is undefined there);
    ``i2`` is then 0.
    """

    k: int
    pooled_effect: float
    q_stat: float
    df: int
    i2_raw: float
    i2: float
    p_value: float

    @property
    def i2_raw_defined(self) -> bool:
        return not math.isnan(self.i2_raw)


@dataclass(frozen=True)
class TruePopulation:
    """Population parameters under equal standard errors.

    Build with :meth:`from_tau2` or :meth:`from_i2` so the three of tau2,
    sigma and i2_true stay consistent.
    """

    mean_effect: float
    tau2: float
    sigma: float
    i2_true: float

    @classmethod
    def from_tau2(cls, tau2: float, sigma: float, mean_effect: float = 0.0) -> "TruePopulation":
        if tau2 < 0 or sigma <= 0:
            raise DomainError("need tau2 >= 0 and sigma > 0")
        return cls(mean_effect, tau2, sigma, tau2 / (tau2 + sigma ** 2))

    @classmethod
    def from_i2(cls, i2: float, sigma: float, mean_effect: float = 0.0) -> "TruePopulation":
        _check_i2(i2)
        if sigma <= 0:
            raise DomainError("sigma must be positive")
        return cls(mean_effect, sigma ** 2 * i2 / (1.0 - i2), sigma, i2)


def _check_i2(i2):
    if not 0.0 <= i2 < 1.0:
        raise DomainError(f"I^2 must lie in [0, 1), got {i2}")


# -- array kernels ----------------------------------------------------------

def weighted_mean(effects, std_errs) -> np.ndarray:
    """Inverse-variance weighted mean over the last axis."""
    effects = np.asarray(effects, dtype=float)
    w = np.broadcast_to(1.0 / np.asarray(std_errs, dtype=float) ** 2, effects.shape)
    # centring on the minimum keeps identical effects exact
    base = effects.min(axis=-1)
    return base + np.sum(w * (effects - base[..., None]), axis=-1) / np.sum(w, axis=-1)


def q_statistic(effects, std_errs) -> np.ndarray:
    """Cochran's Q over the last axis."""
    effects = np.asarray(effects, dtype=float)
    se = np.asarray(std_errs, dtype=float)
    centre = weighted_mean(effects, se)
    dev = (effects - centre[..., None]) / se
    return np.sum(dev * dev, axis=-1)


def i2_from_q(q, df):
    """Return ``(i2_raw, i2)`` for Q value(s) at ``df`` degrees of freedom.

    Works elementwise on arrays.  Where Q == 0 the raw value is NaN and the
    rounded value is 0.
    """
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(q > 0, 1.0 - df / np.where(q > 0, q, 1.0), np.nan)
    rounded = np.where(q > df, raw, 0.0)
    if raw.ndim == 0:
        return float(raw), float(rounded)
    return raw, rounded


# -- operations on MetaAnalysis --------------------------------------------

def _pooled(effects, std_errs):
    # exactly rounded sums make the result independent of study order
    base = min(effects)
    w = [1.0 / (se * se) for se in std_errs]
    return base + math.fsum(wi * (e - base) for wi, e in zip(w, effects)) / math.fsum(w)


def pooled_effect(m: MetaAnalysis) -> float:
    if m.k < 1:
        raise InsufficientDataError("empty meta-analysis")
    return _pooled([s.effect for s in m.studies], [s.std_err for s in m.studies])


def cochran_q(m: MetaAnalysis) -> float:
    if m.k < 2:
        raise InsufficientDataError(f"Cochran's Q needs at least 2 studies, got {m.k}")
    effects = [s.effect for s in m.studies]
    std_errs = [s.std_err for s in m.studies]
    centre = _pooled(effects, std_errs)
    return math.fsum(((e - centre) / se) ** 2 for e, se in zip(effects, std_errs))


def i2_hat(q: float, df: int) -> tuple[float, float]:
    """Raw and zero-truncated I^2 estimates from Q and its degrees of freedom."""
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    if q < 0 or not math.isfinite(q):
        raise DomainError(f"Q must be finite and >= 0, got {q}")
    return i2_from_q(q, df)


def noncentrality_general(true_effects: Sequence[float], sigmas: Sequence[float]) -> float:
    """Noncentrality of Q given true effects and their standard errors.

    Deviations are taken from the simple (unweighted) mean of the true effects.
    """
    b = np.asarray(true_effects, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    if b.shape != s.shape:
        raise DomainError("true_effects and sigmas differ in length")
    if b.size < 2:
        raise InsufficientDataError("need at least 2 studies")
    if np.any(s <= 0):
        raise DomainError("sigmas must be positive")
    return float(np.sum(((b - b.mean()) / s) ** 2))


def noncentrality_equal_sigma(k: int, i2: float) -> float:
    """K * I^2 / (1 - I^2), the noncentrality when all standard errors are equal."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    _check_i2(i2)
    return k * i2 / (1.0 - i2)


def analyze(m: MetaAnalysis | Iterable[Study]) -> HeterogeneityReport:
    if not isinstance(m, MetaAnalysis):
        m = MetaAnalysis(m)
    if m.k < 2:
        raise InsufficientDataError(f"need at least 2 studies, got {m.k}")
    df = m.k - 1
    q = cochran_q(m)
    raw, rounded = i2_hat(q, df)
    p = chisq_sf(q, ChiSquareParams(df))
    return HeterogeneityReport(
        k=m.k,
        pooled_effect=pooled_effect(m),
        q_stat=q,
        df=df,
        i2_raw=raw,
        i2=rounded,
        p_value=p,
    )
