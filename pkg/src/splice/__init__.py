"""Sparse pseudo-likelihood inverse covariance estimation."""

from ._kernels import BACKEND
from .cholesky import fit_cholesky_path, inverted_ordering, precision_from_cholesky
from .estimator import (RegressionParams, fit_splice_path, precision_from_params,
                        build_symmetric_design)
from .homotopy import StoppingRule, WeightedLassoProblem, trace_path
from .metrics import entropy_loss, quadratic_loss, roc_curve, spectral_norm
from .ridge import fit_ridge
from .selection import select_lambda

__version__ = "0.1.0"
__all__ = [
    "BACKEND", "RegressionParams", "StoppingRule", "WeightedLassoProblem",
    "build_symmetric_design", "entropy_loss", "fit_cholesky_path", "fit_ridge",
    "fit_splice_path", "inverted_ordering", "precision_from_cholesky",
    "precision_from_params", "quadratic_loss", "roc_curve", "select_lambda",
    "spectral_norm", "trace_path",
]
