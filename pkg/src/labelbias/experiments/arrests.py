"""Arrest cohort surrogate and the rho sweep over simulated true offending.

The county arrest records behind the original analysis are private, so the
cohort here is synthetic: it reproduces the schema (age, past arrest count,
high-policing indicator, future arrest) and the coefficient scale only.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from ..data import Dataset
from ..errors import InvalidConfigError
from ..estimators import auc, fit_logistic, predict
from ..seeding import derive_seed, rng
from .results import SweepCell, SweepResult, flatten, map_points

COHORT_SIZE = 25_918
COMPLEX_FEATURES = ["age", "A0", "Z"]
SIMPLE_FEATURES = ["age", "A0"]
SYNTHETIC_NOTE = "synthetic arrest surrogate; matches schema and coefficient scale only"


@dataclass(frozen=True)
class ArrestConfig:
    p_high_policing: float = 0.3
    rate_intercept: float = 0.0  # log-rate of past arrests: a + b*behavior + c*Z
    rate_behavior: float = 0.5
    rate_policing: float = 0.5
    kappa: float = 0.5  # effect of Z on the logit of future arrest
    age_min: int = 18
    age_max: int = 70

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_high_policing <= 1.0:
            raise InvalidConfigError(f"p_high_policing={self.p_high_policing} is not a probability")
        if self.rate_behavior < 0 or self.rate_policing < 0:
            raise InvalidConfigError("arrest-rate coefficients must be non-negative")
        if self.age_min > self.age_max:
            raise InvalidConfigError("age_min exceeds age_max")
        for name, v in asdict(self).items():
            if not math.isfinite(v):
                raise InvalidConfigError(f"{name} is not finite")


def generate_arrest_surrogate(n: int = COHORT_SIZE, seed: int = 0, config: ArrestConfig | None = None) -> Dataset:
    if n < 1:
        raise InvalidConfigError(f"n must be >= 1, got {n}")
    cfg = config or ArrestConfig()
    gen = rng(seed, "arrest-surrogate")
    age = gen.integers(cfg.age_min, cfg.age_max + 1, size=n).astype(float)
    z = (gen.random(n) < cfg.p_high_policing).astype(float)
    behavior = gen.standard_normal(n)
    rate = np.exp(cfg.rate_intercept + cfg.rate_behavior * behavior + cfg.rate_policing * z)
    a0 = gen.poisson(rate).astype(float)
    p1 = expit(-1.0 - 0.01 * age + 0.5 * a0 + cfg.kappa * z)
    a1 = (gen.random(n) < p1).astype(float)
    return Dataset(
        ["age", "Z", "behavior", "A0", "A1"],
        np.column_stack([age, z, behavior, a0, a1]),
        {"proxy_label": "A1", "retained": ["age", "A0"], "candidate": "Z"},
    )


def offense_probability(d: Dataset, rho: float) -> np.ndarray:
    """Pr(B1 = 1) = inverse-logit(-1 - age/100 + A0/2 + rho*Z)."""
    d.require(["age", "A0", "Z"])
    return expit(-1.0 - d["age"] / 100.0 + d["A0"] / 2.0 + rho * d["Z"])


def simulate_true_offense(d: Dataset, rho: float, seed: int) -> np.ndarray:
    p = offense_probability(d, rho)
    u = rng(seed, "true-offense").random(d.n_rows)
    return (u < p).astype(float)


def _split(d: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    order = rng(seed, "arrest-split").permutation(d.n_rows)
    half = d.n_rows // 2
    return d.take(np.sort(order[:half])), d.take(np.sort(order[half:]))


def _rho_point(index: int, rho: float, test: Dataset, scores: dict[str, np.ndarray],
               n_sim: int, seed: int, n_train: int) -> tuple[list[SweepCell], np.ndarray]:
    point_seed = derive_seed(seed, "rho-sweep", index)
    draws = np.empty((n_sim, 2))
    for j in range(n_sim):
        b1 = simulate_true_offense(test, rho, derive_seed(point_seed, j))
        draws[j] = [auc(scores["complex"], b1), auc(scores["simple"], b1)]
    cells = []
    for k, model in enumerate(("complex", "simple")):
        mean = float(draws[:, k].mean())
        se = float(draws[:, k].std(ddof=1) / math.sqrt(n_sim)) if n_sim > 1 else 0.0
        cells.append(SweepCell(rho, model, "true", "auc", mean, se, n_train, test.n_rows, point_seed))
        proxy = auc(scores[model], test["A1"])
        cells.append(SweepCell(rho, model, "proxy", "auc", proxy, 0.0, n_train, test.n_rows, point_seed))
    return cells, draws


def run_rho_sweep(
    grid: Sequence[float] | None = None,
    dataset: Dataset | None = None,
    n_sim: int = 20,
    seed: int = 0,
    jobs: int = 1,
) -> SweepResult:
    """Train logistic models on future arrests once; score them on simulated offending per rho.

    ``metadata["draws"]`` keeps the per-draw AUCs (columns: complex, simple)
    for each grid point so paired gaps can be assessed.
    """
    grid = [round(-1.0 + 0.2 * i, 10) for i in range(11)] if grid is None else [float(r) for r in grid]
    if not all(math.isfinite(r) for r in grid):
        raise InvalidConfigError("rho grid must be finite")
    if dataset is None:
        dataset = generate_arrest_surrogate(COHORT_SIZE, derive_seed(seed, "surrogate"))
    dataset.require(["age", "A0", "Z", "A1"])
    train, test = _split(dataset, seed)
    scores = {
        "complex": predict(fit_logistic(train, "A1", COMPLEX_FEATURES), test),
        "simple": predict(fit_logistic(train, "A1", SIMPLE_FEATURES), test),
    }
    args = [(i, r, test, scores, n_sim, seed, train.n_rows) for i, r in enumerate(grid)]
    results = map_points(_rho_point, args, jobs)
    meta = {
        "n_sim": n_sim, "seed": seed, "n": dataset.n_rows, "note": SYNTHETIC_NOTE,
        "draws": [r[1].tolist() for r in results],
    }
    return SweepResult("rho", grid, flatten(r[0] for r in results), meta)


def locate_rho_crossover(
    dataset: Dataset, lo: float = -1.0, hi: float = 1.0, n_sim: int = 20, seed: int = 0, tol: float = 1e-3
) -> float | None:
    """Bisect for the rho where AUC(complex) - AUC(simple) on the true label changes sign.

    Label draws reuse the same uniforms at every rho, so the gap varies
    smoothly.  Returns None when the gap has the same sign at both ends.
    """
    train, test = _split(dataset, seed)
    s_c = predict(fit_logistic(train, "A1", COMPLEX_FEATURES), test)
    s_s = predict(fit_logistic(train, "A1", SIMPLE_FEATURES), test)
    uniforms = [rng(derive_seed(seed, "crossover", j), "true-offense").random(test.n_rows) for j in range(n_sim)]

    def gap(rho: float) -> float:
        p = offense_probability(test, rho)
        return float(np.mean([auc(s_c, (u < p).astype(float)) - auc(s_s, (u < p).astype(float)) for u in uniforms]))

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0:
        return lo
    if (g_lo > 0) == (g_hi > 0):
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
