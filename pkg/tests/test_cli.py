import json

import numpy as np
import pytest

from labelbias.cli import main
from labelbias.sem import StylizedParams, build_stylized, sample

from .health_fixture import make_health_frame


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    return code


def test_sem_sweep_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "fig2.csv"
    code = run(["sem-sweep", "--alpha", 0.4, "--gamma", 0.4, "--delta", 0.4, "--seed", 7,
                "--betas", "0,0.2", "--n-train", 2000, "--n-test", 2000, "--out", out])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "param,value,model,label,metric,metric_value,stderr,n_train,n_test,seed"
    combos = {tuple(l.split(",")[2:4]) for l in lines[1:]}
    assert combos == {(m, l) for m in ("simple", "complex") for l in ("proxy", "true")}
    meta = json.loads((tmp_path / "fig2.csv.meta.json").read_text())
    assert meta["config"]["seed"] == 7
    assert meta["config"]["betas"] == [0.0, 0.2]
    assert "numpy" in meta["versions"]


def test_sem_sweep_requires_seed(tmp_path, capsys):
    code = run(["sem-sweep", "--out", tmp_path / "x.csv"])
    assert code != 0
    err = capsys.readouterr().err
    assert "usage" in err and "--seed" in err


def test_sem_sweep_infeasible_beta(tmp_path, capsys):
    code = run(["sem-sweep", "--seed", 1, "--betas", "0,0.9", "--out", tmp_path / "x.csv"])
    assert code != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "beta^2 + delta <= 1" in err[0]


def test_config_file_supplies_values(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 5\nbetas = 0.1\nn_train = 1000\nn-test = 1000\n")
    out = tmp_path / "a.csv"
    assert run(["sem-sweep", "--config", cfg, "--out", out]) == 0
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["config"]["seed"] == 5 and meta["config"]["n_train"] == 1000
    out2 = tmp_path / "b.csv"
    assert run(["sem-sweep", "--config", cfg, "--seed", 6, "--out", out2]) == 0
    assert json.loads((tmp_path / "b.csv.meta.json").read_text())["config"]["seed"] == 6


def test_arrest_sweep_default_and_bad_path(tmp_path):
    out = tmp_path / "fig3.csv"
    assert run(["arrest-sweep", "--seed", 3, "--n", 4000, "--n-sim", 2, "--rhos=-1,1", "--out", out]) == 0
    assert len(out.read_text().splitlines()) == 1 + 2 * 2 * 2
    meta = json.loads((tmp_path / "fig3.csv.meta.json").read_text())
    assert "synthetic" in meta["data"]
    assert run(["arrest-sweep", "--seed", 3, "--data", tmp_path / "missing.csv", "--out", out]) != 0


def test_arrest_sweep_default_cohort_size():
    from labelbias.cli import build_parser

    args = build_parser().parse_args(["arrest-sweep", "--seed", "1", "--out", "x.csv"])
    assert args.n == 25_918


def test_arrest_sweep_from_csv(tmp_path):
    from labelbias.experiments import generate_arrest_surrogate

    data = tmp_path / "cohort.csv"
    generate_arrest_surrogate(3000, seed=1).to_csv(data)
    out = tmp_path / "o.csv"
    assert run(["arrest-sweep", "--seed", 1, "--data", data, "--n-sim", 2, "--rhos", "0", "--out", out]) == 0


def test_health_enroll(tmp_path, capsys):
    data = tmp_path / "data_new.csv"
    make_health_frame(1500, seed=4).to_csv(data, index=False)
    out = tmp_path / "fig4.csv"
    assert run(["health-enroll", "--seed", 2, "--data", data, "--out", out]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "capacity,model,n_enrolled,high_needs_enrolled,black_fraction"
    assert len(lines) == 1 + 7 * 2
    assert run(["health-enroll", "--seed", 2, "--data", data, "--capacities", "0.1,1.5", "--out", out]) != 0

    frame = make_health_frame(200, seed=5)
    frame["extra_col"] = 0
    bad = tmp_path / "bad.csv"
    frame.to_csv(bad, index=False)
    capsys.readouterr()
    assert run(["health-enroll", "--seed", 2, "--data", bad, "--out", out]) != 0
    assert "extra_col" in capsys.readouterr().err


def test_criterion_check_analytic(capsys):
    assert run(["criterion-check", "--alpha", ".4", "--beta", "0", "--gamma", ".4", "--delta", ".4"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["decision"] == "ExcludeZ"
    assert run(["criterion-check", "--alpha", ".4", "--beta", ".5", "--gamma", ".4", "--delta", ".4"]) == 0
    assert json.loads(capsys.readouterr().out)["decision"] != "ExcludeZ"


def test_criterion_check_empirical(tmp_path, capsys):
    data = tmp_path / "s.csv"
    sample(build_stylized(StylizedParams(0.4, 0, 0.4, 0.4)), 200_000, seed=3).to_csv(data)
    args = ["criterion-check", "--data", data, "--proxy", "A1", "--retained", "A0", "--candidate", "Z"]
    assert run(args + ["--true", "B1", "--basis", "theorem1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mode"] == "empirical" and report["decision"] == "ExcludeZ"
    assert run(args + ["--true", "B9"]) != 0
    assert "B9" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["sem-sweep", "--betas", "0,0.3", "--n-train", "3000", "--n-test", "3000"],
        ["arrest-sweep", "--n", "3000", "--n-sim", "3", "--rhos=-1,0,1"],
        ["criterion-check", "--alpha", "0.4", "--beta", "0.1", "--gamma", "0.4", "--delta", "0.4"],
    ],
)
def test_byte_identical_reruns(tmp_path, argv):
    outputs = []
    for jobs in (1, 4, 1):
        d = tmp_path / f"run{len(outputs)}"
        d.mkdir()
        out = d / "out.csv"
        assert main([*argv, "--seed", "11", "--jobs", str(jobs), "--out", str(out)]) == 0
        outputs.append((out.read_bytes(), (d / "out.csv.meta.json").read_bytes()))
    assert outputs[0] == outputs[1] == outputs[2]
