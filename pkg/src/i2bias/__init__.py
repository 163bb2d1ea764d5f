"""Heterogeneity statistics for meta-analysis and the small-sample bias of I^2."""

from .bias import (BiasPoint, BiasQuery, Method, bias_curve, bias_point,
                   expectation_closed_form, expectation_quadrature)
from .errors import DomainError, InsufficientDataError, QuadratureError
from .interval import IntervalEstimate, i2_confidence_interval
from .meta import (HeterogeneityReport, MetaAnalysis, Study, TruePopulation, analyze,
                   cochran_q, i2_hat, noncentrality_equal_sigma, noncentrality_general,
                   pooled_effect)
from .simulate import Mode, SimConfig, SimResult, calibrated_true_effects, ci_coverage, simulate

__version__ = "0.1.0"
