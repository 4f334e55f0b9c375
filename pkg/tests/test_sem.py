import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from labelbias.errors import InvalidParamsError, NotStandardizedError
from labelbias.sem import (
    LinearSem,
    StylizedParams,
    build_stylized,
    d_connected_paths,
    implied_covariance,
    random_standardized_sem,
    sample,
    stylized_pairwise_covariances,
    trek_covariance,
)


def random_valid_params(gen, size):
    out = []
    while len(out) < size:
        a, b, g, d = gen.uniform(0, 1, 4)
        if StylizedParams.is_valid(a, b, g, d):
            out.append(StylizedParams(a, b, g, d))
    return out


valid_params = st.tuples(*(st.floats(0, 1) for _ in range(4))).filter(
    lambda t: StylizedParams.is_valid(*t)
).map(lambda t: StylizedParams(*t))


def test_stylized_variances_at_paper_setting():
    sem = build_stylized(StylizedParams(0.4, 0.0, 0.4, 0.4))
    assert sem.exo_variances["Z"] == 1.0
    assert sem.exo_variances["B0"] == sem.exo_variances["B1"] == 1.0
    assert sem.exo_variances["A0"] == pytest.approx(0.68, abs=1e-15)
    assert sem.bidirected_edges == (("B0", "B1", 0.4),)


def test_zero_params_give_independent_unit_nodes():
    g = implied_covariance(build_stylized(StylizedParams(0, 0, 0, 0)))
    np.testing.assert_array_equal(g.cov, np.eye(5))
    np.testing.assert_array_equal(g.mean, np.zeros(5))


@pytest.mark.parametrize("params", [(0.9, 0.9, 0.9, 0.0), (0.5, 0.9, 0.5, 0.5), (1.2, 0, 0, 0), (0, 0, 0, -0.1)])
def test_infeasible_params_rejected(params):
    with pytest.raises(InvalidParamsError):
        StylizedParams(*params)


def test_boundary_params_accepted():
    # delta = 1 - beta^2 and sigma_A^2 = 0 exactly
    StylizedParams(0.6, 0.0, 0.8, 1.0)
    sem = build_stylized(StylizedParams(0.0, 0.6, 0.0, 0.64))
    ds = sample(sem, 5, seed=0)
    assert np.all(np.isfinite(ds.values))


def test_implied_covariance_examples():
    g = implied_covariance(build_stylized(StylizedParams(0.4, 0, 0.4, 0.4)))
    assert g.covariance("A0", "Z") == pytest.approx(0.4, abs=1e-12)
    assert g.covariance("A1", "A0") == pytest.approx(0.224, abs=1e-12)
    assert g.covariance("B1", "A0") == pytest.approx(0.16, abs=1e-12)
    g = implied_covariance(build_stylized(StylizedParams(0.4, 0.2, 0.4, 0.4)))
    assert g.covariance("A0", "Z") == pytest.approx(0.48, abs=1e-12)


def test_trek_paths_between_z_and_a0():
    sem = build_stylized(StylizedParams(0.3, 0.2, 0.5, 0.1))
    paths = sorted(tuple(p) for p, _ in d_connected_paths(sem, "Z", "A0"))
    assert paths == [("Z", "A0"), ("Z", "B0", "A0")]
    assert trek_covariance(sem, "Z", "A0") == pytest.approx(0.3 + 0.2 * 0.5, abs=1e-15)


def test_trek_b1_a0_closed_form():
    a, b, g, d = 0.3, 0.2, 0.5, 0.1
    sem = build_stylized(StylizedParams(a, b, g, d))
    assert trek_covariance(sem, "B1", "A0") == pytest.approx(a * b + b * b * g + g * d, abs=1e-15)


def test_trek_disconnected_pair():
    sem = LinearSem(("X", "Y"))
    assert trek_covariance(sem, "X", "Y") == 0.0


def test_trek_requires_standardized():
    sem = LinearSem(("X", "Y"), (("X", "Y", 0.5),), (), {"X": 1.0, "Y": 1.0})
    with pytest.raises(NotStandardizedError):
        trek_covariance(sem, "X", "Y")


def test_cycle_rejected():
    with pytest.raises(InvalidParamsError):
        LinearSem(("X", "Y"), (("X", "Y", 0.1), ("Y", "X", 0.1)))


def test_bidirected_covariance_bound():
    with pytest.raises(InvalidParamsError):
        LinearSem(("X", "Y"), (), (("X", "Y", 0.6),), {"X": 0.5, "Y": 0.5})


@settings(max_examples=300, deadline=None)
@given(valid_params)
def test_unit_variances(params):
    g = implied_covariance(build_stylized(params))
    np.testing.assert_allclose(np.diag(g.cov), 1.0, atol=1e-12, rtol=0)


@settings(max_examples=300, deadline=None)
@given(valid_params)
def test_closed_forms_match_both_routes(params):
    sem = build_stylized(params)
    g = implied_covariance(sem)
    for (a, b), value in stylized_pairwise_covariances(params).items():
        assert abs(g.covariance(a, b) - value) <= 1e-12
        assert abs(trek_covariance(sem, a, b) - value) <= 1e-12


@pytest.mark.parametrize("n_nodes", [4, 5, 6])
def test_trek_matches_matrix_route_on_random_dags(n_nodes):
    gen = np.random.default_rng(100 + n_nodes)
    for _ in range(25):
        sem = random_standardized_sem(n_nodes, gen, n_bidirected=int(gen.integers(0, 3)))
        g = implied_covariance(sem)
        np.testing.assert_allclose(np.diag(g.cov), 1.0, atol=1e-12)
        for i, a in enumerate(sem.nodes):
            for b in sem.nodes[i:]:
                assert abs(trek_covariance(sem, a, b) - g.covariance(a, b)) <= 1e-12


def test_sample_single_row_and_header():
    ds = sample(build_stylized(StylizedParams(0.4, 0, 0.4, 0.4)), 1, seed=3)
    assert ds.values.shape == (1, 5)
    assert ds.columns == ["Z", "B0", "B1", "A0", "A1"]


def test_sample_deterministic():
    sem = build_stylized(StylizedParams(0.4, 0.1, 0.4, 0.4))
    a, b = sample(sem, 1000, seed=11), sample(sem, 1000, seed=11)
    assert a.to_csv() == b.to_csv()
    assert not np.array_equal(a.values, sample(sem, 1000, seed=12).values)


def test_sample_covariance_converges():
    sem = build_stylized(StylizedParams(0.4, 0, 0.4, 0.4))
    ds = sample(sem, 10**6, seed=1)
    emp = np.cov(ds.values, rowvar=False)
    g = implied_covariance(sem)
    idx = g.index(ds.columns)
    np.testing.assert_allclose(emp, g.cov[np.ix_(idx, idx)], atol=0.01)
    assert abs(ds["A1"].var() - 1.0) <= 0.01


def test_sample_degenerate_perfect_correlation():
    params = StylizedParams(0.3, 0.5, 0.3, 0.75)  # delta == sigma_B^2
    ds = sample(build_stylized(params), 2000, seed=5)
    np.testing.assert_allclose(ds["B0"] - ds["B1"], 0.0, atol=1e-12)


def test_csv_round_trip(tmp_path):
    ds = sample(build_stylized(StylizedParams(0.4, 0, 0.4, 0.4)), 50, seed=2)
    path = tmp_path / "s.csv"
    ds.to_csv(path)
    from labelbias.data import Dataset

    back = Dataset.from_csv(path)
    assert back.columns == ds.columns
    np.testing.assert_array_equal(back.values, ds.values)
