import csv
import json

import pytest

from csskm.cli import main
from csskm.io import read_weights_csv


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--seed", "0", "--out-matrix", str(d / "X.csv"), "--out-labels", str(d / "y.txt")]) == 0
    return d


def _cluster(simulated, out, *extra):
    return main(["cluster", "--input", str(simulated / "X.csv"), "--clusters", "3", "--t", "5",
                 "--seed", "0", "--out-dir", str(out), *extra])


def test_simulate_cluster_eval(simulated, tmp_path, capsys):
    assert _cluster(simulated, tmp_path / "run", "--labels", str(simulated / "y.txt")) == 0
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["accuracy"] >= 0.95
    assert report["n_samples"] == 60 and report["n_features"] == 100
    capsys.readouterr()
    assert main(["eval", "--pred", str(tmp_path / "run" / "assignment.csv"),
                 "--truth", str(simulated / "y.txt")]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["accuracy"] == report["accuracy"]
    assert sum(map(sum, result["confusion"])) == 60


def test_budget_out_of_range_exits_2(simulated, tmp_path, capsys):
    code = main(["cluster", "--input", str(simulated / "X.csv"), "--clusters", "3", "--t", "0.5",
                 "--out-dir", str(tmp_path)])
    assert code == 2
    assert "valid range" in capsys.readouterr().err


def test_unknown_flag_exits_1(capsys):
    assert main(["cluster", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_input_exits_2(tmp_path):
    assert main(["cluster", "--input", str(tmp_path / "nope.csv"), "--clusters", "2", "--t", "1.2",
                 "--out-dir", str(tmp_path)]) == 2


def test_weights_feasible(simulated, tmp_path):
    assert _cluster(simulated, tmp_path, "--dense") == 0
    w = read_weights_csv(tmp_path / "weights.csv", [f"f{k}" for k in range(100)], n_clusters=3, T=5.0)
    assert (w.weights >= 0).all()
    assert (w.weights.sum(axis=1) <= 5.0 + 1e-6).all()


def test_reruns_are_byte_identical(simulated, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b", tmp_path / "c"]
    assert _cluster(simulated, outs[0]) == 0
    assert _cluster(simulated, outs[1]) == 0
    assert _cluster(simulated, outs[2], "--threads", "4") == 0
    for name in ("assignment.csv", "weights.csv", "report.json"):
        first = (outs[0] / name).read_bytes()
        assert all((o / name).read_bytes() == first for o in outs[1:]), name


def test_baseline_algorithms(simulated, tmp_path):
    assert main(["cluster", "--input", str(simulated / "X.csv"), "--clusters", "3", "--algo", "kmeans",
                 "--out-dir", str(tmp_path / "km")]) == 0
    assert _cluster(simulated, tmp_path / "sp", "--algo", "sparse-kmeans") == 0
    assert (tmp_path / "sp" / "global_weights.csv").exists()
    report = json.loads((tmp_path / "sp" / "report.json").read_text())
    assert report["algorithm"] == "sparse-kmeans" and report["global_weights_support"] > 0


def test_sweep(simulated, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--input", str(simulated / "X.csv"), "--clusters", "3", "--restarts", "3",
                 "--t-grid", "1.5,3,8", "--labels", str(simulated / "y.txt"), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["T"]) for r in rows] == [1.5, 3.0, 8.0]
    sizes = [int(r["support_size"]) for r in rows]
    assert sizes == sorted(sizes)
    assert all(0 <= float(r["accuracy"]) <= 1 for r in rows)


def test_sweep_rejects_grid_outside_range(simulated, tmp_path):
    assert main(["sweep", "--input", str(simulated / "X.csv"), "--clusters", "3",
                 "--t-grid", "2,20", "--out", str(tmp_path / "s.csv")]) == 2
    assert main(["sweep", "--input", str(simulated / "X.csv"), "--clusters", "3",
                 "--t-grid", "a,b", "--out", str(tmp_path / "s.csv")]) == 1


def test_simulate_inline_spec(tmp_path):
    spec = json.dumps({"n_per_cluster": [4, 4], "p": 5, "blocks": [[0, [0, 2]]]})
    assert main(["simulate", "--spec", spec, "--out-matrix", str(tmp_path / "X.csv"),
                 "--out-labels", str(tmp_path / "y.txt")]) == 0
    assert len((tmp_path / "y.txt").read_text().split()) == 8
    assert main(["simulate", "--spec", "{not json", "--out-matrix", str(tmp_path / "X.csv"),
                 "--out-labels", str(tmp_path / "y.txt")]) == 2
