"""CSV and JSON formats for matrices, labels, weights and run reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import Assignment, DataMatrix, InvalidArgumentError, WeightTensor, cluster_pairs

WEIGHTS_HEADER = ["feature", "cluster_a", "cluster_b", "weight"]
ASSIGNMENT_HEADER = ["sample_id", "cluster"]


class ParseError(InvalidArgumentError):
    """Malformed input file; the message names the offending row and column."""


def _fmt(x: float) -> str:
    # repr is the shortest string that parses back to the same double
    return repr(float(x))


def read_matrix_csv(
    path,
    has_header: bool = False,
    has_row_ids: bool = False,
    transpose: bool = False,
) -> DataMatrix:
    """Parse a samples-as-rows numeric CSV.

    ``transpose`` reads a features-as-rows file (common for expression
    tables) and flips it after parsing.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: file is empty")

    header = None
    if has_header:
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header present but no data rows")
    first_data_line = 2 if has_header else 1

    start = 1 if has_row_ids else 0
    width = len(rows[0])
    ids, values = [], []
    for r, row in enumerate(rows):
        line = r + first_data_line
        if len(row) != width:
            raise ParseError(f"{path}: row {line} has {len(row)} columns, expected {width}")
        if has_row_ids:
            ids.append(row[0].strip())
        parsed = []
        for c, cell in enumerate(row[start:], start=start + 1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: row {line}, column {c}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: row {line}, column {c}: non-finite value {cell!r}")
            parsed.append(v)
        values.append(parsed)
    if width - start < 1:
        raise ParseError(f"{path}: no numeric columns")

    names = None
    if header is not None:
        if len(header) != width:
            raise ParseError(f"{path}: header has {len(header)} columns, data rows have {width}")
        names = header[start:]
    X = DataMatrix(np.array(values), ids or None, names)
    return X.transpose() if transpose else X


def write_matrix_csv(X: DataMatrix, path, header: bool = True, row_ids: bool = True) -> None:
    header = header and X.feature_names is not None
    row_ids = row_ids and X.sample_ids is not None
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        if header:
            out.writerow((["sample_id"] if row_ids else []) + list(X.feature_names))
        for i, row in enumerate(X.values):
            out.writerow(([X.sample_ids[i]] if row_ids else []) + [_fmt(v) for v in row])


def write_labels(labels: Sequence[int], path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels), encoding="utf-8")


def read_labels(path, n_clusters: int | None = None) -> Assignment:
    """Read labels as one integer per line, or an assignment CSV with a
    ``sample_id,cluster`` header."""
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError(f"{path}: no labels")
    if lines[0].replace(" ", "") == ",".join(ASSIGNMENT_HEADER):
        lines = [ln.rsplit(",", 1)[-1].strip() for ln in lines[1:]]
        offset = 2
    else:
        offset = 1
    labels = []
    for i, ln in enumerate(lines):
        try:
            labels.append(int(ln))
        except ValueError:
            raise ParseError(f"{path}: line {i + offset}: not an integer label: {ln!r}") from None
    if min(labels) < 0:
        raise ParseError(f"{path}: labels must be non-negative")
    if n_clusters is None:
        return Assignment.from_labels(labels)
    return Assignment(labels, n_clusters)


def write_assignment_csv(z: Assignment, path, sample_ids: Sequence[str] | None = None) -> None:
    ids = sample_ids if sample_ids is not None else [str(i) for i in range(z.n)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(ASSIGNMENT_HEADER)
        for sid, c in zip(ids, z.labels):
            out.writerow([sid, int(c)])


def write_weights_csv(w: WeightTensor, path, feature_names: Sequence[str] | None = None, dense: bool = False) -> None:
    """Long-format weights, pair-major then feature order.

    Sparse mode keeps only strictly positive weights.
    """
    names = list(feature_names) if feature_names is not None else [str(k) for k in range(w.p)]
    if len(names) != w.p:
        raise InvalidArgumentError(f"{len(names)} feature names for p={w.p}")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(WEIGHTS_HEADER)
        for (a, b), row in zip(w.pairs, w.weights):
            for k, v in enumerate(row):
                if dense or v > 0:
                    out.writerow([names[k], a, b, _fmt(v)])


def read_weights_csv(
    path,
    feature_names: Sequence[str] | None = None,
    n_clusters: int | None = None,
    T: float | None = None,
) -> WeightTensor:
    """Rebuild a tensor from long-format weights.

    Without ``feature_names`` the features are taken in order of first
    appearance, which is only complete for dense files. ``T`` defaults to the
    largest pair L1 norm in the file.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != WEIGHTS_HEADER:
        raise ParseError(f"{path}: expected header {','.join(WEIGHTS_HEADER)}")
    entries = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ParseError(f"{path}: row {line} has {len(row)} columns, expected 4")
        try:
            entries.append((row[0], int(row[1]), int(row[2]), float(row[3])))
        except ValueError:
            raise ParseError(f"{path}: row {line}: malformed weight entry {row!r}") from None
    names = list(feature_names) if feature_names is not None else list(dict.fromkeys(e[0] for e in entries))
    if not names:
        raise ParseError(f"{path}: no features to rebuild a tensor from")
    index = {name: k for k, name in enumerate(names)}
    C = n_clusters if n_clusters is not None else max([e[2] for e in entries], default=1) + 1
    weights = np.zeros((C * (C - 1) // 2, len(names)))
    rows_by_pair = {pair: r for r, pair in enumerate(cluster_pairs(C))}
    for line, (name, a, b, v) in enumerate(entries, start=2):
        if name not in index:
            raise ParseError(f"{path}: row {line}: unknown feature {name!r}")
        if (a, b) not in rows_by_pair:
            raise ParseError(f"{path}: row {line}: invalid cluster pair ({a}, {b})")
        weights[rows_by_pair[(a, b)], index[name]] = v
    if T is None:
        T = float(weights.sum(axis=1).max()) if weights.size else 1.0
    return WeightTensor(C, T, weights)


@dataclass
class PairSummary:
    cluster_a: int
    cluster_b: int
    support_size: int
    l1: float
    top_features: list[list[Any]]


@dataclass
class RunReport:
    """JSON run summary.

    ``elapsed_seconds`` stays null unless timing was requested, so default
    reports are byte-for-byte reproducible.
    """

    config: dict[str, Any]
    algorithm: str
    objective: float
    objective_trace: list[float]
    iterations: int
    converged: bool
    restart_index: int
    seed_used: int
    warnings: list[str]
    n_samples: int
    n_features: int
    cluster_sizes: list[int]
    selected_features: int
    pairs: list[PairSummary] = field(default_factory=list)
    accuracy: float | None = None
    adjusted_rand_index: float | None = None
    mapping: dict[str, int] | None = None
    global_weights_support: int | None = None
    elapsed_seconds: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunReport":
        d = dict(d)
        d["pairs"] = [PairSummary(**p) for p in d.get("pairs", [])]
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def pair_summaries(w: WeightTensor, feature_names: Sequence[str] | None = None, top: int = 10) -> list[PairSummary]:
    names = list(feature_names) if feature_names is not None else [str(k) for k in range(w.p)]
    out = []
    for (a, b), row in zip(w.pairs, w.weights):
        # stable sort: equal weights keep feature order
        order = np.argsort(-row, kind="stable")[:top]
        out.append(
            PairSummary(
                cluster_a=a,
                cluster_b=b,
                support_size=int(np.count_nonzero(row > 0)),
                l1=float(row.sum()),
                top_features=[[names[k], float(row[k])] for k in order if row[k] > 0],
            )
        )
    return out
