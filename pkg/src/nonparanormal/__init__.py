"""Bayesian semi-supervised binary classification for data that becomes
Gaussian after an unknown monotone transformation of each dimension.

The transformation is a constrained cubic B-spline shared by both classes,
learned jointly with the class moments and the missing labels by a blocked
Gibbs sampler.  See README.md for the pipeline and file formats.
"""

from .classifier import (
    Dataset,
    FittedModel,
    PreprocessMap,
    apply_preprocess,
    boundary_count,
    fit_preprocess,
    load_model,
    make_dataset,
    predict,
    save_model,
    select_and_fit,
)
from .gibbs import ChainConfig, PosteriorSummary, run_chain
from .metrics import ConfusionCounts, Rates, confusion, mean_rates, rates
from .numeric import RngStream
from .simulate import SimScenario, gen_dataset, parse_manifest
from .splines import SplineBasis, cubic_basis

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FittedModel",
    "PreprocessMap",
    "apply_preprocess",
    "boundary_count",
    "fit_preprocess",
    "load_model",
    "make_dataset",
    "predict",
    "save_model",
    "select_and_fit",
    "ChainConfig",
    "PosteriorSummary",
    "run_chain",
    "ConfusionCounts",
    "Rates",
    "confusion",
    "mean_rates",
    "rates",
    "RngStream",
    "SimScenario",
    "gen_dataset",
    "parse_manifest",
    "SplineBasis",
    "cubic_basis",
    "__version__",
]
