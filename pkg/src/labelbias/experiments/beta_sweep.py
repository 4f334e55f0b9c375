"""Simple vs complex linear models on the stylized arrest/behavior model."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..estimators import fit_linear, predict
from ..gaussian import population_mse
from ..seeding import derive_seed
from ..sem import StylizedParams, build_stylized, implied_covariance, sample
from .results import SweepCell, SweepResult, flatten, map_points

FEATURES = {"complex": ["A0", "Z"], "simple": ["A0"]}
LABELS = {"proxy": "A1", "true": "B1"}


def default_beta_grid(alpha: float = 0.4, gamma: float = 0.4, delta: float = 0.4, step: float = 0.05) -> list[float]:
    """0, step, ... up to min(0.6, the largest feasible beta)."""
    grid = []
    for i in range(int(round(0.6 / step)) + 1):
        beta = round(i * step, 10)
        if not StylizedParams.is_valid(alpha, beta, gamma, delta):
            break
        grid.append(beta)
    return grid


def analytic_model_rmse(params: StylizedParams, model: str, label: str) -> float:
    """Population RMSE of the population regression of A1 on the model's features."""
    g = implied_covariance(build_stylized(params))
    return math.sqrt(population_mse(g, "A1", FEATURES[model], LABELS[label]))


def _beta_point(index: int, beta: float, alpha: float, gamma: float, delta: float,
                n_train: int, n_test: int, seed: int) -> list[SweepCell]:
    params = StylizedParams(alpha, beta, gamma, delta)
    point_seed = derive_seed(seed, "beta-sweep", index)
    data = sample(build_stylized(params), n_train + n_test, point_seed)
    train = data.take(np.arange(n_train))
    test = data.take(np.arange(n_train, n_train + n_test))
    cells = []
    for model, feats in FEATURES.items():
        fit = fit_linear(train, "A1", feats)
        scores = predict(fit, test)
        for label, col in LABELS.items():
            sq = (scores - test[col]) ** 2
            mse = float(sq.mean())
            value = math.sqrt(mse)
            se = float(sq.std(ddof=1) / math.sqrt(n_test)) / (2 * value)
            cells.append(SweepCell(beta, model, label, "rmse", value, se, n_train, n_test, point_seed))
            exact = analytic_model_rmse(params, model, label)
            cells.append(SweepCell(beta, model, label, "rmse_analytic", exact, 0.0, n_train, n_test, point_seed))
    return cells


def run_beta_sweep(
    grid: Sequence[float] | None = None,
    alpha: float = 0.4,
    gamma: float = 0.4,
    delta: float = 0.4,
    n_train: int = 100_000,
    n_test: int = 100_000,
    seed: int = 0,
    jobs: int = 1,
) -> SweepResult:
    """Fit complex (A0, Z) and simple (A0) models of A1 at each beta; score on A1 and B1."""
    grid = default_beta_grid(alpha, gamma, delta) if grid is None else [float(b) for b in grid]
    for beta in grid:
        StylizedParams(alpha, beta, gamma, delta)  # raises on infeasible points
    args = [(i, b, alpha, gamma, delta, n_train, n_test, seed) for i, b in enumerate(grid)]
    cells = flatten(map_points(_beta_point, args, jobs))
    meta = {"alpha": alpha, "gamma": gamma, "delta": delta, "n_train": n_train, "n_test": n_test, "seed": seed}
    return SweepResult("beta", list(grid), cells, meta)
