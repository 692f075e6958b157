import json

import numpy as np
import pytest

from csskm.core import Assignment, DataMatrix, WeightTensor
from csskm.io import (
    ParseError,
    RunReport,
    pair_summaries,
    read_labels,
    read_matrix_csv,
    read_weights_csv,
    write_assignment_csv,
    write_labels,
    write_matrix_csv,
    write_weights_csv,
)


def test_parse_plain_matrix(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,2\n3,4\n")
    X = read_matrix_csv(f)
    assert X.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]
    assert X.feature_names is None and X.sample_ids is None


def test_header_and_ids_populate_names(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("id,a,b\nx,1,2\ny,3,4\n")
    X = read_matrix_csv(f, has_header=True, has_row_ids=True)
    assert list(X.feature_names) == ["a", "b"]
    assert list(X.sample_ids) == ["x", "y"]


def test_transpose_reads_features_as_rows(tmp_path):
    f = tmp_path / "g.csv"
    f.write_text("gene,s1,s2,s3\ng1,1,2,3\ng2,4,5,6\n")
    X = read_matrix_csv(f, has_header=True, has_row_ids=True, transpose=True)
    assert (X.n, X.p) == (3, 2)
    assert list(X.sample_ids) == ["s1", "s2", "s3"]
    assert list(X.feature_names) == ["g1", "g2"]
    assert X.values[:, 1].tolist() == [4.0, 5.0, 6.0]


def test_matrix_round_trip_is_exact(tmp_path, rng):
    X = DataMatrix(rng.normal(size=(6, 4)) * 10.0 ** rng.integers(-8, 8, size=(6, 4)),
                   [f"s{i}" for i in range(6)], [f"f{k}" for k in range(4)])
    f = tmp_path / "m.csv"
    write_matrix_csv(X, f)
    Y = read_matrix_csv(f, has_header=True, has_row_ids=True)
    assert np.array_equal(X.values, Y.values)
    assert list(Y.sample_ids) == list(X.sample_ids)
    assert list(Y.feature_names) == list(X.feature_names)


@pytest.mark.parametrize(
    "text,where",
    [
        ("1,2\n3\n", "row 2"),
        ("1,2\n3,x\n", "row 2, column 2"),
        ("1,2\nnan,4\n", "row 2, column 1"),
        ("", "empty"),
    ],
)
def test_malformed_matrix_names_location(tmp_path, text, where):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(ParseError, match=where):
        read_matrix_csv(f)


def test_header_width_mismatch(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("a,b,c\n1,2\n")
    with pytest.raises(ParseError, match="header"):
        read_matrix_csv(f, has_header=True)


def test_labels_round_trip(tmp_path):
    f = tmp_path / "labels.txt"
    write_labels([0, 2, 1, 1], f)
    assert read_labels(f).labels.tolist() == [0, 2, 1, 1]
    g = tmp_path / "assignment.csv"
    write_assignment_csv(Assignment([1, 0, 1], 2), g, ["a", "b", "c"])
    assert g.read_text() == "sample_id,cluster\na,1\nb,0\nc,1\n"
    assert read_labels(g).labels.tolist() == [1, 0, 1]


def test_bad_labels(tmp_path):
    f = tmp_path / "labels.txt"
    f.write_text("0\n1\nfoo\n")
    with pytest.raises(ParseError, match="line 3"):
        read_labels(f)


def test_dense_weights_rows(tmp_path):
    w = WeightTensor(3, 1.0, [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    f = tmp_path / "w.csv"
    write_weights_csv(w, f, ["g1", "g2"], dense=True)
    lines = f.read_text().splitlines()
    assert lines[0] == "feature,cluster_a,cluster_b,weight"
    assert len(lines) == 1 + 6
    assert lines[1:3] == ["g1,0,1,1.0", "g2,0,1,0.0"]
    back = read_weights_csv(f, ["g1", "g2"], n_clusters=3, T=1.0)
    assert back == w


def test_sparse_weights_skip_zeros(tmp_path):
    f = tmp_path / "w.csv"
    write_weights_csv(WeightTensor.zeros(3, 4, 1.5), f)
    assert f.read_text() == "feature,cluster_a,cluster_b,weight\n"
    w = WeightTensor(2, 1.5, [[0.0, 0.6, 0.8, 0.0]])
    write_weights_csv(w, f)
    assert len(f.read_text().splitlines()) == 3
    back = read_weights_csv(f, ["0", "1", "2", "3"], n_clusters=2, T=1.5)
    assert np.array_equal(back.weights, w.weights)


def test_weights_unknown_feature(tmp_path):
    f = tmp_path / "w.csv"
    f.write_text("feature,cluster_a,cluster_b,weight\nzz,0,1,0.5\n")
    with pytest.raises(ParseError, match="unknown feature"):
        read_weights_csv(f, ["a"], n_clusters=2)


def test_run_report_json_round_trip():
    w = WeightTensor(2, 1.5, [[0.0, 0.8, 0.6]])
    report = RunReport(
        config={"n_clusters": 2, "T": 1.5},
        algorithm="csskm",
        objective=12.5,
        objective_trace=[10.0, 12.5],
        iterations=2,
        converged=True,
        restart_index=3,
        seed_used=0,
        warnings=[],
        n_samples=10,
        n_features=3,
        cluster_sizes=[4, 6],
        selected_features=2,
        pairs=pair_summaries(w, ["a", "b", "c"]),
        accuracy=0.9,
    )
    text = report.to_json()
    assert RunReport.from_json(text) == report
    data = json.loads(text)
    assert data["elapsed_seconds"] is None
    assert data["pairs"][0]["top_features"] == [["b", 0.8], ["c", 0.6]]
    assert data["pairs"][0]["support_size"] == 2
