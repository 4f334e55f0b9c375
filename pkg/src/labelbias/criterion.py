"""Feature-exclusion criteria for models trained on a proxy label.

Given a true label Y, a proxy Y', retained features X and a candidate Z, the
complex estimator E[Y' | X, Z] is no better than the simple one E[Y' | X] on Y
whenever Cov(E[Y'|X,Z], Y | X) <= 0.  When the complex estimator is linear in
Z that covariance factors as g * Cov(Y, Z | X) with g = Cov(Y', Z | X) /
Var(Z | X), so opposite signs of Cov(Y, Z | X) and Cov(Y', Z | X) suffice.

Quantities are computed either from a joint Gaussian covariance (analytic
mode) or from data by Frisch-Waugh residualization on X (empirical mode).
Empirical conditional covariances are averages over X; a sign that changes
across the X distribution is not detected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.linalg

from .data import Dataset
from .errors import DegenerateDesignError, InvalidVarianceError, MissingRoleError, SingularDesignError
from .estimators import fit_linear, least_squares, predict
from .gaussian import GaussianSystem, condition, population_mse
from .seeding import rng
from .sem import StylizedParams, build_stylized, implied_covariance

ANALYTIC_TOL = 1e-8
EMPIRICAL_SE_MULTIPLIER = 2.0


class Decision(str, Enum):
    EXCLUDE_Z = "ExcludeZ"
    INCLUDE_Z = "IncludeZ"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ProxyProblem:
    proxy_label: str
    retained: list[str]
    candidate: str
    true_label: str | None = None
    system: GaussianSystem | None = None
    dataset: Dataset | None = None
    assumed_cov_y_z_given_x: float | None = None
    additive_noise: bool = False

    def __post_init__(self) -> None:
        self.retained = list(self.retained)
        if (self.system is None) == (self.dataset is None):
            raise MissingRoleError("provide exactly one of a Gaussian system or a dataset")
        if self.true_label is None and self.assumed_cov_y_z_given_x is None:
            raise MissingRoleError("true label absent and no assumed Cov(Y, Z | X) supplied")
        needed = [self.proxy_label, self.candidate, *self.retained]
        if self.true_label is not None:
            needed.append(self.true_label)
        have = set(self.system.labels) if self.system is not None else set(self.dataset.columns)
        missing = [c for c in needed if c not in have]
        if missing:
            raise MissingRoleError(f"role column(s) missing: {missing}")
        if self.candidate in self.retained or self.proxy_label in self.retained:
            raise MissingRoleError("candidate and proxy must not be among the retained features")

    @property
    def mode(self) -> str:
        return "analytic" if self.system is not None else "empirical"

    @classmethod
    def stylized(cls, params: StylizedParams, **kw) -> "ProxyProblem":
        """Y = B1 (future behavior), Y' = A1 (future arrests), X = A0, Z = Z."""
        g = implied_covariance(build_stylized(params))
        return cls(proxy_label="A1", retained=["A0"], candidate="Z", true_label="B1", system=g, **kw)

    @classmethod
    def from_dataset(cls, d: Dataset, **kw) -> "ProxyProblem":
        roles = d.roles
        for r in ("proxy_label", "retained", "candidate"):
            if r not in roles:
                raise MissingRoleError(f"dataset has no {r!r} role")
        retained = roles["retained"]
        retained = [retained] if isinstance(retained, str) else list(retained)
        return cls(
            proxy_label=roles["proxy_label"], retained=retained, candidate=roles["candidate"],
            true_label=roles.get("true_label"), dataset=d, **kw,
        )


@dataclass
class CriterionReport:
    cov_yhat_y_given_x: float
    cov_y_z_given_x: float
    cov_yproxy_z_given_x: float
    strictness_term: float
    decision: Decision
    basis: str
    tolerance: float
    mode: str
    standard_errors: dict[str, float] = field(default_factory=dict)

    @property
    def strict(self) -> bool:
        return self.strictness_term > self.tolerance

    def to_dict(self) -> dict:
        return {
            "cov_yhat_y_given_x": self.cov_yhat_y_given_x,
            "cov_y_z_given_x": self.cov_y_z_given_x,
            "cov_yproxy_z_given_x": self.cov_yproxy_z_given_x,
            "strictness_term": self.strictness_term,
            "decision": self.decision.value,
            "basis": self.basis,
            "tolerance": self.tolerance,
            "mode": self.mode,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass
class _Quantities:
    cov_yhat_y: float
    cov_y_z: float
    cov_yp_z: float
    strictness: float
    # tolerance per quantity
    tol: dict[str, float]
    se: dict[str, float]
    proxy_is_true: bool


def _analytic(p: ProxyProblem) -> _Quantities:
    g = p.system
    X = p.retained
    targets = [p.proxy_label, p.candidate] + ([p.true_label] if p.true_label else [])
    law = condition(g, targets, X)
    var_z = law.covariance(p.candidate, p.candidate)
    cov_yp_z = law.covariance(p.proxy_label, p.candidate)
    if var_z <= ANALYTIC_TOL:
        raise DegenerateDesignError("candidate is (almost) a linear function of the retained features")
    slope = cov_yp_z / var_z
    if p.true_label is not None:
        cov_y_z = law.covariance(p.true_label, p.candidate)
    else:
        cov_y_z = float(p.assumed_cov_y_z_given_x)
    proxy_is_true = p.true_label is not None and (
        p.true_label == p.proxy_label
        or g.covariance(p.true_label, p.true_label) + g.covariance(p.proxy_label, p.proxy_label)
        - 2 * g.covariance(p.true_label, p.proxy_label) <= ANALYTIC_TOL
    )
    tol = dict.fromkeys(("cov_yhat_y", "cov_y_z", "cov_yp_z", "strictness"), ANALYTIC_TOL)
    return _Quantities(slope * cov_y_z, cov_y_z, cov_yp_z, slope * slope * var_z, tol, {}, proxy_is_true)


def residualize(d: Dataset, on: Sequence[str], columns: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Residuals of each column after least squares on an intercept and ``on``."""
    X = np.column_stack([np.ones(d.n_rows), d.matrix(on)]) if on else np.ones((d.n_rows, 1))
    Q, R, _ = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if d.n_rows <= X.shape[1] or diag[-1] <= max(X.shape) * np.finfo(float).eps * diag[0]:
        raise DegenerateDesignError(f"residualization design on {list(on)} is singular")
    Y = np.column_stack(columns)
    resid = Y - Q @ (Q.T @ Y)
    return [resid[:, j] for j in range(resid.shape[1])]


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n))


def _empirical(p: ProxyProblem) -> _Quantities:
    d = p.dataset
    try:
        fit = fit_linear(d, p.proxy_label, [*p.retained, p.candidate])
    except SingularDesignError as exc:
        raise DegenerateDesignError(str(exc)) from exc
    yhat = predict(fit, d)
    cols = [yhat, d[p.proxy_label], d[p.candidate]]
    if p.true_label is not None:
        cols.append(d[p.true_label])
    res = residualize(d, p.retained, cols)
    r_hat, r_yp, r_z = res[:3]
    k = EMPIRICAL_SE_MULTIPLIER
    cov_yp_z, se_yp_z = _mean_and_se(r_yp * r_z)
    strict, se_strict = _mean_and_se(r_hat * r_hat)
    se = {"cov_yp_z": se_yp_z, "strictness": se_strict}
    if p.true_label is not None:
        r_y = res[3]
        cov_y_z, se["cov_y_z"] = _mean_and_se(r_y * r_z)
        cov_yhat_y, se["cov_yhat_y"] = _mean_and_se(r_hat * r_y)
        proxy_is_true = p.true_label == p.proxy_label or bool(np.array_equal(d[p.true_label], d[p.proxy_label]))
    else:
        cov_y_z = float(p.assumed_cov_y_z_given_x)
        slope = fit.coefficients[p.candidate]
        cov_yhat_y = slope * cov_y_z
        se["cov_y_z"] = 0.0
        se["cov_yhat_y"] = 0.0
        proxy_is_true = False
    tol = {name: (k * s if s > 0 else ANALYTIC_TOL) for name, s in se.items()}
    return _Quantities(cov_yhat_y, cov_y_z, cov_yp_z, strict, tol, se, proxy_is_true)


def _quantities(p: ProxyProblem) -> _Quantities:
    return _analytic(p) if p.mode == "analytic" else _empirical(p)


def _opposite_signs(q: _Quantities) -> bool:
    a, b = q.cov_y_z, q.cov_yp_z
    return abs(a) > q.tol["cov_y_z"] and abs(b) > q.tol["cov_yp_z"] and (a > 0) != (b > 0)


def _report(q: _Quantities, decision: Decision, basis: str, tolerance: float, mode: str) -> CriterionReport:
    return CriterionReport(
        q.cov_yhat_y, q.cov_y_z, q.cov_yp_z, q.strictness, decision, basis, tolerance, mode, dict(q.se)
    )


def theorem1_condition(p: ProxyProblem) -> CriterionReport:
    """Decide from the sign of Cov(E[Y'|X,Z], Y | X).

    Non-positive covariance means the simple model is at least as accurate on
    Y.  A positive covariance only supports keeping Z when the proxy is the
    true label plus independent noise (``additive_noise``) or equals it.

    The covariance is averaged over X.  A sign that changes across X is not
    detected.
    """
    q = _quantities(p)
    tol = q.tol["cov_yhat_y"]
    c, s = q.cov_yhat_y, q.strictness
    if c > tol:
        decision = Decision.INCLUDE_Z if (p.additive_noise or q.proxy_is_true) else Decision.INCONCLUSIVE
    elif abs(c) <= tol and s <= q.tol["strictness"] and not _opposite_signs(q):
        # Z adds nothing to the proxy fit; both estimators coincide
        decision = Decision.INCONCLUSIVE
    else:
        decision = Decision.EXCLUDE_Z
    return _report(q, decision, "theorem1", tol, p.mode)


def corollary_signs(p: ProxyProblem) -> CriterionReport:
    """Decide from the signs of Cov(Y, Z | X) and Cov(Y', Z | X).

    Assumes the complex estimator is linear in Z, which holds for the linear
    fits used here and for jointly Gaussian systems.
    """
    q = _quantities(p)
    if _opposite_signs(q):
        decision = Decision.EXCLUDE_Z
    elif (
        (p.additive_noise or q.proxy_is_true)
        and abs(q.cov_y_z) > q.tol["cov_y_z"]
        and abs(q.cov_yp_z) > q.tol["cov_yp_z"]
    ):
        decision = Decision.INCLUDE_Z
    else:
        decision = Decision.INCONCLUSIVE
    tolerance = max(q.tol["cov_y_z"], q.tol["cov_yp_z"])
    return _report(q, decision, "corollary1", tolerance, p.mode)


@dataclass
class MseDecomposition:
    mse_complex: float
    mse_simple: float
    second_moment_gap: float  # E[Yhat_XZ^2] - E[Yhat_X^2]
    cross_moment_gap: float  # E[Y Yhat_X] - E[Y Yhat_XZ]

    @property
    def difference(self) -> float:
        return self.mse_complex - self.mse_simple

    @property
    def identity_rhs(self) -> float:
        return self.second_moment_gap + 2.0 * self.cross_moment_gap


def analytic_mse(p: ProxyProblem) -> MseDecomposition:
    """Population MSEs on Y of the complex and simple proxy regressions."""
    if p.mode != "analytic" or p.true_label is None:
        raise MissingRoleError("analytic MSE needs a Gaussian system with the true label")
    g = p.system
    y, yp = p.true_label, p.proxy_label
    full = [*p.retained, p.candidate]
    mse_c = population_mse(g, yp, full, y)
    mse_s = population_mse(g, yp, p.retained, y)

    def moments(features: list[str]) -> tuple[float, float]:
        law = condition(g, [yp], features)
        b, a = law.coefficients[0], law.intercept[0]
        mu_f = g.mean[g.index(features)]
        mean_hat = a + b @ mu_f
        second = b @ g.block(features, features) @ b + mean_hat**2
        cross = b @ g.block(features, [y])[:, 0] + mean_hat * g.mean[g.index([y])[0]]
        return float(second), float(cross)

    sec_c, cross_c = moments(full)
    sec_s, cross_s = moments(list(p.retained))
    return MseDecomposition(mse_c, mse_s, sec_c - sec_s, cross_s - cross_c)


@dataclass
class NoiseBenchmark:
    mse_complex: float
    mse_simple: float
    stderr_difference: float
    n_train: int
    n_test: int
    noise_variance: float


def noise_benchmark(p: ProxyProblem, noise_variance: float, n: int, seed: int) -> NoiseBenchmark:
    """Train both estimators on Y + S with independent S and score them on Y.

    Analytic mode draws ``n`` training and ``n`` test rows from the Gaussian
    system; empirical mode splits the dataset in half.
    """
    if not noise_variance >= 0:
        raise InvalidVarianceError(f"noise variance must be >= 0, got {noise_variance}")
    if p.true_label is None:
        raise MissingRoleError("noise benchmark needs an observed true label")
    gen = rng(seed, "noise-benchmark")
    needed = [p.true_label, *p.retained, p.candidate]
    if p.mode == "analytic":
        g = p.system.marginal(needed)
        train = Dataset(g.labels, g.sample(n, gen))
        test = Dataset(g.labels, g.sample(n, gen))
    else:
        d = p.dataset
        order = gen.permutation(d.n_rows)
        half = d.n_rows // 2
        train, test = d.take(order[:half]), d.take(order[half:])
    noisy = train[p.true_label] + math.sqrt(noise_variance) * gen.standard_normal(train.n_rows)
    train = train.with_column("__proxy__", noisy)
    complex_fit = fit_linear(train, "__proxy__", [*p.retained, p.candidate])
    simple_fit = fit_linear(train, "__proxy__", p.retained)
    y = test[p.true_label]
    err_c = (predict(complex_fit, test) - y) ** 2
    err_s = (predict(simple_fit, test) - y) ** 2
    diff = err_c - err_s
    return NoiseBenchmark(
        float(err_c.mean()), float(err_s.mean()), float(diff.std(ddof=1) / math.sqrt(diff.size)),
        train.n_rows, test.n_rows, float(noise_variance),
    )
