"""Robust mean estimation for imbalanced two-component Gaussian mixtures with adversarial noise."""

from .agnostic import AgnosticConfig, Branch, agnostic_cov, agnostic_mean
from .baseline_em import EmConfig, estimate_em
from .bench import BenchmarkConfig, BenchmarkRecord, default_model, run_benchmark, run_sensitivity
from .gmm2 import Alg1Config, estimate_alg1
from .model import Dataset, EstimationResult, MixtureModel, estimation_error, matched_errors, validate_model
from .synthdata import GenerationConfig, NoiseModel, generate

__all__ = [
    "AgnosticConfig",
    "Alg1Config",
    "BenchmarkConfig",
    "BenchmarkRecord",
    "Branch",
    "Dataset",
    "EmConfig",
    "EstimationResult",
    "GenerationConfig",
    "MixtureModel",
    "NoiseModel",
    "agnostic_cov",
    "agnostic_mean",
    "default_model",
    "estimate_alg1",
    "estimate_em",
    "estimation_error",
    "generate",
    "matched_errors",
    "run_benchmark",
    "run_sensitivity",
    "validate_model",
]
