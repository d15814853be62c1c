"""CLRBTE: cubic lower-record transmuted exponential lifetime distribution."""

__version__ = "0.1.0"

from .transmute import DomainError, SimplexWeights
from .distribution import Params, cdf, hazard, log_pdf, pdf, quantile, survival
from .properties import MomentReport, describe, raw_moment_quadrature, raw_moment_series
from .sampling import RngStream, sample_ar, sample_composition, tune_envelope
from .datasets import Sample, failure_sample, read_sample, survival_sample
from .registry import CLRBTE, DISTRIBUTIONS, E, TE, TGR, get_distribution
from .estimators import EstimatorId, FitReport, fit
from .gof import compare, gof_block
from .simulation import SimScenario, run_scenario, rank_estimators

__all__ = [
    "DomainError", "SimplexWeights", "Params", "cdf", "hazard", "log_pdf", "pdf",
    "quantile", "survival", "MomentReport", "describe", "raw_moment_quadrature",
    "raw_moment_series", "RngStream", "sample_ar", "sample_composition", "tune_envelope",
    "Sample", "failure_sample", "read_sample", "survival_sample", "CLRBTE", "DISTRIBUTIONS",
    "E", "TE", "TGR", "get_distribution", "EstimatorId", "FitReport", "fit", "compare",
    "gof_block", "SimScenario", "run_scenario", "rank_estimators",
]
