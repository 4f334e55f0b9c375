"""Linear and logistic fits, scoring, and the RMSE/AUC metrics."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.special import expit
from scipy.stats import rankdata

from .data import Dataset
from .errors import (
    AucUndefinedError,
    DegenerateTargetError,
    LengthMismatchError,
    MissingFeatureError,
    SeparationError,
    SingularDesignError,
)

MAX_IRLS_ITER = 100
GRAD_TOL = 1e-8
SEPARATION_NORM = 1e3


@dataclass
class ModelFit:
    family: str
    intercept: float
    coefficients: dict[str, float]
    iterations: int = 0
    converged: bool = True
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def features(self) -> list[str]:
        return list(self.coefficients)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelFit":
        return cls(**json.loads(text))


def _design(d: Dataset, features: Sequence[str], intercept: bool) -> np.ndarray:
    X = d.matrix(features)
    if intercept:
        X = np.column_stack([np.ones(d.n_rows), X])
    return X


def _split_coef(beta: np.ndarray, features: Sequence[str], intercept: bool) -> tuple[float, dict[str, float]]:
    if intercept:
        return float(beta[0]), {f: float(b) for f, b in zip(features, beta[1:])}
    return 0.0, {f: float(b) for f, b in zip(features, beta)}


def least_squares(X: np.ndarray, y: np.ndarray, ridge: float = 0.0, penalize: np.ndarray | None = None) -> np.ndarray:
    """Solve min ||y - X b||^2 + ridge ||b[penalize]||^2 by column-pivoted QR."""
    n, p = X.shape
    if ridge > 0:
        mask = np.ones(p, dtype=bool) if penalize is None else penalize
        aug = np.sqrt(ridge) * np.eye(p)[mask]
        X = np.vstack([X, aug])
        y = np.concatenate([y, np.zeros(aug.shape[0])])
    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size and diag[-1] <= max(X.shape) * np.finfo(float).eps * diag[0]:
        raise SingularDesignError(f"design matrix is rank deficient (rank < {p})")
    sol = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(p)
    beta[piv] = sol
    return beta


def fit_linear(
    d: Dataset, target: str, features: Sequence[str], ridge: float = 0.0, intercept: bool = True
) -> ModelFit:
    """Least squares (ridge when ``ridge > 0``) of ``target`` on ``features``.

    The intercept is never penalized.
    """
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    features = list(features)
    X = _design(d, features, intercept)
    y = d[target]
    if d.n_rows <= len(features) and ridge == 0:
        raise SingularDesignError(f"need more than {len(features)} rows, got {d.n_rows}")
    penalize = np.ones(X.shape[1], dtype=bool)
    if intercept:
        penalize[0] = False
    beta = least_squares(X, y, ridge, penalize)
    # normal-equation residual, relative to |X^T y|
    grad = X.T @ (y - X @ beta) - ridge * np.where(penalize, beta, 0.0)
    scale = max(float(np.linalg.norm(X.T @ y)), 1e-300)
    b0, coef = _split_coef(beta, features, intercept)
    return ModelFit(
        "linear", b0, coef, iterations=1, converged=True,
        diagnostics={"normal_eq_rel_residual": float(np.linalg.norm(grad) / scale), "ridge": float(ridge)},
    )


def fit_logistic(d: Dataset, target: str, features: Sequence[str], intercept: bool = True) -> ModelFit:
    """Maximum-likelihood logistic regression by iteratively reweighted least squares."""
    features = list(features)
    y = d[target]
    if not np.all((y == 0) | (y == 1)):
        raise DegenerateTargetError(f"target {target!r} must be 0/1")
    if y.size == 0 or y.min() == y.max():
        raise DegenerateTargetError(f"target {target!r} has a single class")
    X = _design(d, features, intercept)
    n, p = X.shape
    beta = np.zeros(p)
    if intercept:
        ybar = y.mean()
        beta[0] = np.log(ybar / (1 - ybar))
    converged = False
    grad_norm = np.inf
    it = 0
    for it in range(1, MAX_IRLS_ITER + 1):
        eta = X @ beta
        mu = expit(eta)
        grad = X.T @ (y - mu) / n
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= GRAD_TOL:
            converged = True
            it -= 1
            break
        w = mu * (1 - mu)
        H = (X * w[:, None]).T @ X / n
        try:
            c = scipy.linalg.cho_factor(H)
            step = scipy.linalg.cho_solve(c, grad)
        except (np.linalg.LinAlgError, ValueError):
            raise SeparationError("information matrix became singular; classes look separable") from None
        beta = beta + step
        if not np.all(np.isfinite(beta)) or np.linalg.norm(beta) > SEPARATION_NORM:
            raise SeparationError(f"coefficient norm exceeded {SEPARATION_NORM:g}; data look separable")
    eta = X @ beta
    if eta[y == 0].max() < eta[y == 1].min():
        raise SeparationError("fitted linear predictor separates the classes; the MLE does not exist")
    b0, coef = _split_coef(beta, features, intercept)
    return ModelFit(
        "logistic", b0, coef, iterations=it, converged=converged,
        diagnostics={"gradient_norm": grad_norm},
    )


def predict(fit: ModelFit, d: Dataset) -> np.ndarray:
    missing = [f for f in fit.coefficients if f not in d]
    if missing:
        raise MissingFeatureError(f"dataset lacks feature(s) {missing}")
    if d.n_rows == 0:
        return np.empty(0)
    eta = fit.intercept + d.matrix(fit.features) @ np.array(list(fit.coefficients.values()))
    if fit.family == "logistic":
        return expit(eta)
    return eta


def rmse(scores: np.ndarray, truth: np.ndarray) -> float:
    scores, truth = np.asarray(scores, dtype=float), np.asarray(truth, dtype=float)
    if scores.shape != truth.shape:
        raise LengthMismatchError(f"scores {scores.shape} vs truth {truth.shape}")
    return float(np.sqrt(np.mean((scores - truth) ** 2)))


def auc(scores: np.ndarray, truth: np.ndarray) -> float:
    """Mann-Whitney AUC; ties between a positive and a negative count 1/2."""
    scores, truth = np.asarray(scores, dtype=float), np.asarray(truth)
    if scores.shape != truth.shape:
        raise LengthMismatchError(f"scores {scores.shape} vs truth {truth.shape}")
    pos = truth == 1
    n_pos = int(pos.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise AucUndefinedError("AUC needs both classes present")
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
