"""Seeded Monte Carlo simulation of equal-sigma meta-analyses.

Replications are split into fixed-size chunks.  Chunk ``i`` draws from its
own Philox (counter-based) stream keyed by ``(seed, i)``, and per-chunk sums
are combined in chunk order with exactly rounded summation, so the result
depends only on the config, never on how many workers ran the chunks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .interval import interval_bounds
from .meta import i2_from_q, q_statistic

CHUNK = 50_000


class Mode(str, enum.Enum):
    FIXED = "fixed"    # fixed true effects calibrated so Q is exactly noncentral chi-square
    RANDOM = "random"  # true effects redrawn from Normal(mean, tau2) every replication


@dataclass(frozen=True)
class SimConfig:
    k: int
    i2_true: float
    reps: int
    seed: int = 0
    sigma: float = 1.0
    mode: Mode = Mode.FIXED

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")
        if not 0.0 <= self.i2_true < 1.0:
            raise DomainError(f"I^2 must lie in [0, 1), got {self.i2_true}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise DomainError(f"reps must be a positive integer, got {self.reps}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def df(self) -> int:
        return self.k - 1

    @property
    def tau2(self) -> float:
        return self.sigma ** 2 * self.i2_true / (1.0 - self.i2_true)


@dataclass(frozen=True)
class SimResult:
    mean_i2_hat: float
    mean_i2_raw: float
    prob_zero: float
    std_error_of_mean: float
    reps_used: int


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    std_error: float
    reps_used: int


def calibrated_true_effects(k: int, mean: float, tau2: float) -> np.ndarray:
    """K true effects with simple mean ``mean`` and squared deviations summing to K*tau2.

    Even K: half at mean - d, half at mean + d with d = sqrt(tau2).
    Odd K: one effect at the mean and (K-1)/2 on each side at
    d = sqrt(K*tau2/(K-1)).
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if tau2 < 0:
        raise DomainError(f"tau2 must be >= 0, got {tau2}")
    half = k // 2
    if k % 2 == 0:
        d = math.sqrt(tau2)
        offsets = [-d] * half + [d] * half
    else:
        d = math.sqrt(k * tau2 / (k - 1))
        offsets = [-d] * half + [0.0] + [d] * half
    return mean + np.array(offsets)


def _stream(seed, chunk):
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_sizes(reps):
    n_full, rest = divmod(reps, CHUNK)
    return [CHUNK] * n_full + ([rest] if rest else [])


def _draw_q(cfg: SimConfig, chunk: int, n: int) -> np.ndarray:
    rng = _stream(cfg.seed, chunk)
    k, sigma = cfg.k, cfg.sigma
    if cfg.mode is Mode.FIXED:
        beta = calibrated_true_effects(k, 0.0, cfg.tau2)
        effects = beta + sigma * rng.standard_normal((n, k))
    else:
        beta = math.sqrt(cfg.tau2) * rng.standard_normal((n, k))
        effects = beta + sigma * rng.standard_normal((n, k))
    return q_statistic(effects, np.full(k, sigma))


def _map_chunks(fn, cfg, workers):
    sizes = _chunk_sizes(cfg.reps)
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(cfg, *job), jobs))
    return [fn(cfg, *job) for job in jobs]


def _estimate_chunk(cfg, chunk, n):
    q = _draw_q(cfg, chunk, n)
    raw, rounded = i2_from_q(q, cfg.df)
    return (
        float(np.sum(rounded)),
        float(np.sum(rounded * rounded)),
        float(np.nansum(raw)),
        int(np.count_nonzero(q <= cfg.df)),
        int(np.count_nonzero(~np.isnan(raw))),
    )


def simulate(cfg: SimConfig, workers: int = 1) -> SimResult:
    parts = _map_chunks(_estimate_chunk, cfg, workers)
    n = cfg.reps
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    raw_sum = math.fsum(p[2] for p in parts)
    zeros = sum(p[3] for p in parts)
    raw_n = sum(p[4] for p in parts)
    mean = s1 / n
    var = max(s2 - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
    return SimResult(
        mean_i2_hat=mean,
        mean_i2_raw=raw_sum / raw_n if raw_n else math.nan,
        prob_zero=zeros / n,
        std_error_of_mean=math.sqrt(var / n),
        reps_used=n,
    )


def _coverage_chunk(cfg, chunk, n):
    q = _draw_q(cfg, chunk, n)
    lower, upper = interval_bounds(q, cfg.df)
    return int(np.count_nonzero((lower <= cfg.i2_true) & (cfg.i2_true <= upper)))


def ci_coverage(cfg: SimConfig, workers: int = 1) -> CoverageResult:
    """Fraction of replications whose 95% interval contains the true I^2."""
    hits = sum(_map_chunks(_coverage_chunk, cfg, workers))
    p = hits / cfg.reps
    return CoverageResult(p, math.sqrt(p * (1.0 - p) / cfg.reps), cfg.reps)
