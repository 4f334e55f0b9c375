"""Feature exclusion under label bias: linear SEMs, Gaussian conditioning,
the exclusion criteria, and reproduction harnesses."""

__version__ = "0.1.0"

from .criterion import (
    CriterionReport,
    Decision,
    ProxyProblem,
    analytic_mse,
    corollary_signs,
    noise_benchmark,
    theorem1_condition,
)
from .data import Dataset
from .estimators import ModelFit, auc, fit_linear, fit_logistic, predict, rmse
from .gaussian import ConditionalLaw, GaussianSystem, condition, stylized_conditional_covs
from .sem import (
    LinearSem,
    StylizedParams,
    build_stylized,
    implied_covariance,
    sample,
    trek_covariance,
)

__all__ = [
    "ConditionalLaw",
    "CriterionReport",
    "Dataset",
    "Decision",
    "GaussianSystem",
    "LinearSem",
    "ModelFit",
    "ProxyProblem",
    "StylizedParams",
    "analytic_mse",
    "auc",
    "build_stylized",
    "condition",
    "corollary_signs",
    "fit_linear",
    "fit_logistic",
    "implied_covariance",
    "noise_benchmark",
    "predict",
    "rmse",
    "sample",
    "stylized_conditional_covs",
    "theorem1_condition",
    "trek_covariance",
]
