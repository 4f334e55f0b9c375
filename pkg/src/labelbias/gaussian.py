"""Partitioned multivariate normals and their conditional laws."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidParamsError, NonGaussianInputError, SingularConditioningSetError

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-9
PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class GaussianSystem:
    labels: tuple[str, ...]
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.cov, dtype=float)
        k = len(labels)
        if len(set(labels)) != k:
            raise NonGaussianInputError("duplicate labels")
        if mean.shape != (k,) or cov.shape != (k, k):
            raise NonGaussianInputError(f"mean {mean.shape} / cov {cov.shape} do not match {k} labels")
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(mean)):
            raise NonGaussianInputError("non-finite mean or covariance")
        if k and np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
            raise NonGaussianInputError("covariance is not symmetric")
        if k and np.linalg.eigvalsh(cov).min() < -PSD_TOL:
            raise NonGaussianInputError("covariance is not positive semidefinite")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def index(self, names: Sequence[str]) -> list[int]:
        pos = {n: i for i, n in enumerate(self.labels)}
        try:
            return [pos[n] for n in names]
        except KeyError as exc:
            raise KeyError(f"unknown label {exc.args[0]!r}") from None

    def covariance(self, a: str, b: str) -> float:
        i, j = self.index([a, b])
        return float(self.cov[i, j])

    def block(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        return self.cov[np.ix_(self.index(rows), self.index(cols))]

    def marginal(self, names: Sequence[str]) -> "GaussianSystem":
        idx = self.index(names)
        return GaussianSystem(tuple(names), self.mean[idx], self.cov[np.ix_(idx, idx)])

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        from .sem import psd_cholesky

        L = psd_cholesky(self.cov)
        return self.mean + gen.standard_normal((n, len(self.labels))) @ L.T


@dataclass(frozen=True)
class ConditionalLaw:
    """Law of ``targets`` given ``given``: mean = intercept + coefficients @ given."""

    targets: tuple[str, ...]
    given: tuple[str, ...]
    intercept: np.ndarray
    coefficients: np.ndarray
    cov: np.ndarray

    def coefficient(self, target: str, given: str) -> float:
        return float(self.coefficients[self.targets.index(target), self.given.index(given)])

    def covariance(self, a: str, b: str) -> float:
        return float(self.cov[self.targets.index(a), self.targets.index(b)])

    def mean_at(self, values: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(values, dtype=float) @ self.coefficients.T


def _solve_spd(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B for symmetric positive definite A via LDL^T."""
    lu, d, perm = scipy.linalg.ldl(A, lower=True)
    pivots = np.diag(d)
    scale = max(1.0, float(np.max(np.abs(np.diag(A)))))
    # 2x2 pivot blocks only arise for indefinite input
    if np.any(np.abs(np.diag(d, -1)) > 0) or np.min(pivots) <= PIVOT_TOL * scale:
        raise SingularConditioningSetError(
            f"conditioning covariance is singular (smallest pivot {np.min(pivots):.3g})"
        )
    y = scipy.linalg.solve_triangular(lu[perm], B[perm], lower=True, unit_diagonal=True)
    y = y / pivots[:, None]
    x = scipy.linalg.solve_triangular(lu[perm].T, y, lower=False, unit_diagonal=True)
    out = np.empty_like(x)
    out[perm] = x
    return out


def condition(g: GaussianSystem, targets: Sequence[str], given: Sequence[str]) -> ConditionalLaw:
    """Conditional law of ``targets`` given ``given`` (Schur complement)."""
    targets, given = tuple(targets), tuple(given)
    if set(targets) & set(given):
        raise InvalidParamsError(f"targets and given overlap: {sorted(set(targets) & set(given))}")
    t_idx, g_idx = g.index(targets), g.index(given)
    S11 = g.cov[np.ix_(t_idx, t_idx)]
    if not given:
        return ConditionalLaw(targets, given, g.mean[t_idx].copy(), np.zeros((len(targets), 0)), S11.copy())
    S12 = g.cov[np.ix_(t_idx, g_idx)]
    S22 = g.cov[np.ix_(g_idx, g_idx)]
    # coefficients = S12 S22^{-1}  <=>  S22 coefficients^T = S21
    coef = _solve_spd(S22, S12.T).T
    cond_cov = S11 - coef @ S12.T
    cond_cov = 0.5 * (cond_cov + cond_cov.T)
    intercept = g.mean[t_idx] - coef @ g.mean[g_idx]
    return ConditionalLaw(targets, given, intercept, coef, cond_cov)


def stylized_conditional_covs(params) -> tuple[float, float]:
    """Closed-form Cov(A1, Z | A0) and Cov(B1, Z | A0) for the stylized model."""
    from .sem import StylizedParams, stylized_pairwise_covariances

    if not isinstance(params, StylizedParams):
        params = StylizedParams(*params)
    s = stylized_pairwise_covariances(params)
    a1_z, a0_z, b1_z = s[("A1", "Z")], s[("A0", "Z")], s[("B1", "Z")]
    a1_a0, b1_a0 = s[("A1", "A0")], s[("B1", "A0")]
    return a1_z - a1_a0 * a0_z, b1_z - b1_a0 * a0_z


def population_mse(g: GaussianSystem, target: str, features: Sequence[str], label: str) -> float:
    """Mean squared error against ``label`` of the population regression E[target | features]."""
    law = condition(g, [target], features)
    b = law.coefficients[0]
    F = g.block(features, features)
    cross = g.block(features, [label])[:, 0]
    var = b @ F @ b - 2.0 * b @ cross + g.covariance(label, label)
    bias = law.intercept[0] + b @ g.mean[g.index(features)] - g.mean[g.index([label])[0]]
    return float(var + bias**2)
