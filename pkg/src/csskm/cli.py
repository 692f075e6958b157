"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io
from .baseline import kmeans, sparse_kmeans
from .core import Config, InvalidArgumentError
from .engine import csskm
from .evaluate import adjusted_rand_index, confusion_matrix, match_accuracy, selected_features
from .simdata import SimSpec, simulate

logger = logging.getLogger("csskm")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _add_input_args(p):
    p.add_argument("--input", required=True, help="matrix CSV, samples as rows")
    p.add_argument("--header", action=argparse.BooleanOptionalAction, default=True,
                   help="first row holds feature names (default: yes)")
    p.add_argument("--row-ids", action=argparse.BooleanOptionalAction, default=True,
                   help="first column holds sample ids (default: yes)")
    p.add_argument("--transpose", action="store_true", help="input has features as rows")


def _add_run_args(p):
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["random_points", "kmeans_pp"], default="kmeans_pp")
    p.add_argument("--max-outer", type=int, default=50)
    p.add_argument("--max-inner", type=int, default=100)
    p.add_argument("--rel-tol", type=float, default=1e-3)
    p.add_argument("--cold-start", action="store_true",
                   help="re-seed centres randomly in every E-step instead of warm starting")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--labels", help="true labels (one integer per line) for scoring")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csskm", description="Cluster-specific sparse K-means.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write the synthetic block-signal dataset")
    p.add_argument("--spec", help="simulation spec as a JSON file or inline JSON object")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-matrix", required=True)
    p.add_argument("--out-labels", required=True)

    p = sub.add_parser("cluster", help="cluster a matrix and write assignment, weights and report")
    _add_input_args(p)
    _add_run_args(p)
    p.add_argument("--t", type=float, help="L1 budget per cluster pair, in [1, sqrt(p)]")
    p.add_argument("--algo", choices=["csskm", "kmeans", "sparse-kmeans"], default="csskm")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dense", action="store_true", help="write zero weights too")
    p.add_argument("--top", type=int, default=10, help="top features per pair in the report")
    p.add_argument("--record-timing", action="store_true",
                   help="store wall time in the report (makes it non-reproducible)")

    p = sub.add_parser("eval", help="score a clustering against true labels")
    p.add_argument("--pred", required=True, help="assignment CSV or labels file")
    p.add_argument("--truth", required=True, help="labels file")
    p.add_argument("--out", help="write the JSON result here instead of stdout")

    p = sub.add_parser("sweep", help="run CSSKM over a grid of L1 budgets")
    _add_input_args(p)
    _add_run_args(p)
    p.add_argument("--t-grid", default="1.5,2,3,5,8")
    p.add_argument("--out", required=True, help="report CSV")
    return parser


def _config(args, T) -> Config:
    return Config(
        n_clusters=args.clusters,
        T=T,
        max_outer_iters=args.max_outer,
        max_inner_iters=args.max_inner,
        restarts=args.restarts,
        seed=args.seed,
        rel_tol=args.rel_tol,
        init_method=args.init,
        warm_start=not args.cold_start,
        threads=args.threads,
    )


def _read_input(args):
    return io.read_matrix_csv(args.input, has_header=args.header, has_row_ids=args.row_ids,
                              transpose=args.transpose)


def _read_truth(path, n):
    truth = io.read_labels(path)
    if truth.n != n:
        raise InvalidArgumentError(f"{path}: {truth.n} labels for {n} samples")
    return truth


def cmd_simulate(args) -> int:
    spec = SimSpec()
    if args.spec:
        text = args.spec if args.spec.lstrip().startswith("{") else Path(args.spec).read_text(encoding="utf-8")
        try:
            spec = SimSpec.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise InvalidArgumentError(f"bad simulation spec: {e}") from None
        except TypeError as e:
            raise InvalidArgumentError(f"bad simulation spec: {e}") from None
    if args.seed is not None:
        spec.seed = args.seed
    X, labels = simulate(spec)
    io.write_matrix_csv(X, args.out_matrix)
    io.write_labels(labels.labels, args.out_labels)
    return EXIT_OK


def cmd_cluster(args) -> int:
    X = _read_input(args)
    truth = _read_truth(args.labels, X.n) if args.labels else None
    if args.algo != "kmeans" and args.t is None:
        raise UsageError("cluster: --t is required unless --algo kmeans\n")
    T = args.t if args.t is not None else 1.0
    cfg = _config(args, T)
    started = time.perf_counter()
    global_w = None
    if args.algo == "csskm":
        result = csskm(X, cfg)
    elif args.algo == "sparse-kmeans":
        result, global_w = sparse_kmeans(X, cfg.n_clusters, T, cfg)
    else:
        result = kmeans(X, cfg.n_clusters, cfg)
    elapsed = time.perf_counter() - started

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = X.feature_names
    io.write_assignment_csv(result.assignment, out / "assignment.csv", X.sample_ids)
    io.write_weights_csv(result.weights, out / "weights.csv", names, dense=args.dense)
    if global_w is not None:
        with (out / "global_weights.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "weight"])
            for k, v in enumerate(global_w):
                if args.dense or v > 0:
                    w.writerow([names[k] if names else str(k), repr(float(v))])

    config = asdict(cfg)
    config["init_method"] = cfg.init_method.value
    # execution detail only; results do not depend on it
    del config["threads"]
    config["algo"] = args.algo
    if args.algo == "kmeans":
        config["T"] = None
    report = io.RunReport(
        config=config,
        algorithm=result.algorithm,
        objective=result.objective,
        objective_trace=list(result.objective_trace),
        iterations=result.iterations,
        converged=result.converged,
        restart_index=result.restart_index,
        seed_used=result.seed_used,
        warnings=list(result.warnings),
        n_samples=X.n,
        n_features=X.p,
        cluster_sizes=[int(v) for v in result.assignment.sizes()],
        selected_features=len(selected_features(result.weights).features),
        pairs=io.pair_summaries(result.weights, names, args.top),
        global_weights_support=None if global_w is None else int(np.count_nonzero(global_w)),
        elapsed_seconds=elapsed if args.record_timing else None,
    )
    if truth is not None:
        acc, mapping = match_accuracy(result.assignment, truth)
        report.accuracy = acc
        report.adjusted_rand_index = adjusted_rand_index(result.assignment, truth)
        report.mapping = {str(k): v for k, v in mapping.items()}
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    if truth is not None:
        print(f"accuracy {report.accuracy:.4f}  ARI {report.adjusted_rand_index:.4f}")
    print(f"F {result.objective:.6g}  iterations {result.iterations}  restart {result.restart_index}")
    return EXIT_OK


def cmd_eval(args) -> int:
    truth = io.read_labels(args.truth)
    pred = io.read_labels(args.pred)
    if pred.n != truth.n:
        raise InvalidArgumentError(f"{pred.n} predicted labels vs {truth.n} true labels")
    acc, mapping = match_accuracy(pred, truth)
    result = {
        "n": pred.n,
        "accuracy": acc,
        "adjusted_rand_index": adjusted_rand_index(pred, truth),
        "mapping": {str(k): v for k, v in mapping.items()},
        "confusion": confusion_matrix(pred, truth, mapping).tolist(),
    }
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_grid(text):
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"sweep: --t-grid must be comma-separated numbers, got {text!r}\n") from None
    if not grid:
        raise UsageError("sweep: --t-grid is empty\n")
    return sorted(grid)


def cmd_sweep(args) -> int:
    X = _read_input(args)
    truth = _read_truth(args.labels, X.n) if args.labels else None
    grid = _parse_grid(args.t_grid)
    for T in grid:
        _config(args, T).validate_for(X)
    rows = []
    for T in grid:
        result = csskm(X, _config(args, T))
        sel = selected_features(result.weights)
        row = {
            "T": repr(T),
            "objective": repr(result.objective),
            "iterations": result.iterations,
            "converged": int(result.converged),
            "support_size": len(sel.features),
            "mean_pair_support": repr(float(np.mean([len(v) for v in sel.per_pair.values()]))),
            "accuracy": "",
            "ari": "",
        }
        if truth is not None:
            row["accuracy"] = repr(match_accuracy(result.assignment, truth)[0])
            row["ari"] = repr(adjusted_rand_index(result.assignment, truth))
        rows.append(row)
    with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "cluster": cmd_cluster, "eval": cmd_eval, "sweep": cmd_sweep}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(str(e))
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        sys.stderr.write(str(e))
        return EXIT_USAGE
    except (InvalidArgumentError, OSError) as e:
        sys.stderr.write(f"csskm {args.command}: error: {e}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
