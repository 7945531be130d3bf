"""Augmented double autoregressive models with boundary-aware inference."""
from adar.diagnostics import hill, information_criteria, portmanteau
from adar.fitting import fit
from adar.inference import HypothesisSpec, estimate, run_tests, simulate_critical_values
from adar.kernels import BACKEND
from adar.likelihood import QuasiLikelihood
from adar.model import (
    InnovationLaw,
    ModelSpec,
    ParamVector,
    SeriesFrame,
    moment_region_dar11,
    sample_innovation,
    simulate,
)
from adar.montecarlo import ExperimentPlan, run_experiment
from adar.weights import WeightScheme, compute_weights

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ExperimentPlan",
    "HypothesisSpec",
    "InnovationLaw",
    "ModelSpec",
    "ParamVector",
    "QuasiLikelihood",
    "SeriesFrame",
    "WeightScheme",
    "compute_weights",
    "estimate",
    "fit",
    "hill",
    "information_criteria",
    "moment_region_dar11",
    "portmanteau",
    "run_experiment",
    "run_tests",
    "sample_innovation",
    "simulate",
    "simulate_critical_values",
]
