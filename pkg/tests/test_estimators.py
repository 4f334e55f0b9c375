import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from labelbias.data import Dataset
from labelbias.errors import (
    AucUndefinedError,
    DegenerateTargetError,
    LengthMismatchError,
    MissingFeatureError,
    SeparationError,
    SingularDesignError,
)
from labelbias.estimators import ModelFit, auc, fit_linear, fit_logistic, predict, rmse
from labelbias.gaussian import condition
from labelbias.sem import StylizedParams, build_stylized, implied_covariance, sample


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p, q in itertools.product(pos, neg))
    return total / (len(pos) * len(neg))


def test_exact_line():
    fit = fit_linear(Dataset.from_columns({"x": [1, 2], "y": [2, 4]}), "y", ["x"])
    assert fit.coefficients["x"] == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert predict(fit, Dataset.from_columns({"x": [3.0]}))[0] == pytest.approx(6.0)


def test_duplicate_column_singular():
    gen = np.random.default_rng(0)
    x = gen.normal(size=100)
    d = Dataset.from_columns({"x": x, "x2": x, "y": x + gen.normal(size=100)})
    with pytest.raises(SingularDesignError):
        fit_linear(d, "y", ["x", "x2"])
    fit = fit_linear(d, "y", ["x", "x2"], ridge=1e-3)
    assert fit.coefficients["x"] == pytest.approx(fit.coefficients["x2"])


def test_normal_equations_hold():
    gen = np.random.default_rng(1)
    X = gen.normal(size=(500, 4))
    d = Dataset.from_columns({**{f"x{i}": X[:, i] for i in range(4)}, "y": X @ [1, -2, 0.5, 0] + gen.normal(size=500)})
    for ridge in (0.0, 0.7):
        fit = fit_linear(d, "y", [f"x{i}" for i in range(4)], ridge=ridge)
        assert fit.diagnostics["normal_eq_rel_residual"] < 1e-8


def test_ridge_path_continuity():
    gen = np.random.default_rng(2)
    X = gen.normal(size=(200, 3))
    cols = {f"x{i}": X[:, i] for i in range(3)}
    d = Dataset.from_columns({**cols, "y": X @ [1.0, 0.5, -1.0] + gen.normal(size=200)})
    base = np.array(list(fit_linear(d, "y", list(cols)).coefficients.values()))
    prev = None
    for ridge in (1.0, 1e-2, 1e-4, 1e-6):
        coef = np.array(list(fit_linear(d, "y", list(cols), ridge=ridge).coefficients.values()))
        if prev is not None:
            assert np.linalg.norm(coef - base) <= np.linalg.norm(prev - base) + 1e-12
        prev = coef
    np.testing.assert_allclose(prev, base, atol=1e-6)


@pytest.mark.parametrize("n,tol", [(10**4, 0.05), (10**6, 0.005)])
def test_linear_fit_converges_to_population(n, tol):
    sem = build_stylized(StylizedParams(0.4, 0, 0.4, 0.4))
    law = condition(implied_covariance(sem), ["A1"], ["A0", "Z"])
    fit = fit_linear(sample(sem, n, seed=4), "A1", ["A0", "Z"])
    assert abs(fit.coefficients["A0"] - law.coefficient("A1", "A0")) < tol
    assert abs(fit.coefficients["Z"] - law.coefficient("A1", "Z")) < tol


def test_stylized_linear_fit_example():
    fit = fit_linear(sample(build_stylized(StylizedParams(0.4, 0, 0.4, 0.4)), 10**6, seed=8), "A1", ["A0", "Z"])
    assert fit.coefficients["A0"] == pytest.approx(0.0762, abs=0.005)
    assert fit.coefficients["Z"] == pytest.approx(0.3695, abs=0.005)


def logistic_data(n, seed, coef=(-1.0, -0.01, 0.5, 0.5)):
    gen = np.random.default_rng(seed)
    age = gen.integers(18, 71, n).astype(float)
    a0 = gen.poisson(1.5, n).astype(float)
    z = gen.binomial(1, 0.3, n).astype(float)
    eta = coef[0] + coef[1] * age + coef[2] * a0 + coef[3] * z
    y = (gen.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    return Dataset.from_columns({"age": age, "a0": a0, "z": z, "y": y})


def test_logistic_recovers_coefficients():
    fit = fit_logistic(logistic_data(50_000, seed=5), "y", ["age", "a0", "z"])
    assert fit.converged and fit.diagnostics["gradient_norm"] <= 1e-8
    truth = {"age": -0.01, "a0": 0.5, "z": 0.5}
    assert abs(fit.intercept + 1.0) < 0.05
    for k, v in truth.items():
        assert abs(fit.coefficients[k] - v) < 0.05


def test_logistic_balanced_noise():
    gen = np.random.default_rng(6)
    n = 20_000
    y = np.zeros(n)
    y[: n // 2] = 1
    d = Dataset.from_columns({"x": gen.normal(size=n), "y": gen.permutation(y)})
    fit = fit_logistic(d, "y", ["x"])
    assert abs(fit.intercept) < 0.05
    assert abs(fit.coefficients["x"]) < 0.05


def test_logistic_separation():
    d = Dataset.from_columns({"x": [0, 1, 2, 3, 4, 5], "y": [0, 0, 0, 1, 1, 1]})
    with pytest.raises(SeparationError):
        fit_logistic(d, "y", ["x"])


def test_logistic_single_class():
    d = Dataset.from_columns({"x": [0, 1, 2], "y": [1, 1, 1]})
    with pytest.raises(DegenerateTargetError):
        fit_logistic(d, "y", ["x"])


def test_predict_logistic_probability():
    fit = ModelFit("logistic", -0.3, {"x": 1.0})
    p = predict(fit, Dataset.from_columns({"x": [0.0]}))[0]
    assert p == pytest.approx(1 / (1 + np.exp(0.3)), abs=1e-15)
    assert p == pytest.approx(0.42556, abs=5e-6)


def test_predict_empty_and_missing():
    fit = ModelFit("linear", 0.0, {"x": 2.0})
    assert predict(fit, Dataset.from_columns({"x": []})).size == 0
    with pytest.raises(MissingFeatureError):
        predict(fit, Dataset.from_columns({"w": [1.0]}))


def test_modelfit_json_round_trip():
    fit = fit_logistic(logistic_data(2000, seed=9), "y", ["age", "a0", "z"])
    assert ModelFit.from_json(fit.to_json()) == fit


def test_rmse_and_auc_examples():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert auc([0.9, 0.1], [1, 0]) == 1.0
    assert auc([0.2, 0.7, 0.6], [1, 0, 0]) == 0.0
    assert pairwise_auc([0.2, 0.7, 0.6], [1, 0, 0]) == 0.0
    with pytest.raises(LengthMismatchError):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(AucUndefinedError):
        auc([0.1, 0.2], [1, 1])


def test_auc_matches_pairwise_oracle_with_ties():
    gen = np.random.default_rng(10)
    for _ in range(200):
        n = int(gen.integers(2, 60))
        scores = gen.integers(0, 5, n).astype(float)
        labels = gen.integers(0, 2, n)
        if labels.min() == labels.max():
            continue
        assert auc(scores, labels) == pairwise_auc(scores, labels)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["exp", "cube", "affine", "logit"]))
def test_auc_invariant_under_monotone_maps(seed, kind):
    gen = np.random.default_rng(seed)
    scores = np.round(gen.normal(size=80), 1)
    labels = gen.integers(0, 2, 80)
    if labels.min() == labels.max():
        return
    f = {
        "exp": np.exp,
        "cube": lambda s: s**3,
        "affine": lambda s: 3 * s + 7,
        "logit": lambda s: 1 / (1 + np.exp(-s)),
    }[kind]
    assert auc(f(scores), labels) == pytest.approx(auc(scores, labels), abs=1e-15)


def test_auc_random_scores():
    gen = np.random.default_rng(11)
    n = 10**5
    assert abs(auc(gen.random(n), gen.integers(0, 2, n)) - 0.5) < 0.01
