"""Reference clusterers: plain Lloyd K-means and a global-weight sparse K-means.

The sparse variant shares one weight vector across all cluster pairs. It is
built from the same solver and loop as CSSKM, not from any external package.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .core import (
    Assignment,
    ClusteringResult,
    Config,
    DataMatrix,
    WeightTensor,
    check_budget,
    objective,
    seeded_rng,
)
from .engine import _run_once, init_assignment, run_restarts
from .estep import EStepResult, _lloyd, compute_centroids, nearest_centroid
from .mstep import global_m_step


def lloyd_kmeans(X: DataMatrix, init: np.ndarray, max_iters: int = 100) -> EStepResult:
    """Textbook Lloyd iterations from the given centroids."""
    mu = np.array(init, dtype=np.float64)
    return _lloyd(X, mu, lambda m: nearest_centroid(X.values, m), mu.shape[0], max_iters)


def within_cluster_ss(X: DataMatrix, z: Assignment) -> float:
    mu = compute_centroids(X, z)
    return float(np.sum((X.values - mu[z.labels]) ** 2))


def kmeans(X: DataMatrix, n_clusters: int, cfg: Config) -> ClusteringResult:
    """Lloyd's algorithm with the CSSKM initialization and restart machinery.

    The restart with the smallest within-cluster sum of squares wins. The
    weights field is the uniform tensor and the trace records F under it.
    """
    cfg = dataclasses.replace(cfg, n_clusters=n_clusters)
    uniform = WeightTensor.uniform(n_clusters, X.p)

    def run_one(r):
        z0 = init_assignment(X, n_clusters, cfg.init_method, seeded_rng(cfg.seed, r))
        est = lloyd_kmeans(X, compute_centroids(X, z0), cfg.max_inner_iters)
        trace = [objective(X, z0, uniform)] + [objective(X, z, uniform) for z in est.history]
        warnings = () if est.converged else (f"Lloyd iterations hit the cap of {cfg.max_inner_iters}",)
        return ClusteringResult(
            assignment=est.assignment,
            weights=uniform,
            objective_trace=tuple(trace),
            converged=est.converged,
            iterations=est.iterations,
            restart_index=r,
            seed_used=cfg.seed,
            warnings=warnings,
            algorithm="kmeans",
        )

    # the budget is irrelevant here, so restart bookkeeping validates with T = 1
    return run_restarts(
        X,
        dataclasses.replace(cfg, T=1.0),
        run_one,
        lambda a, b: within_cluster_ss(X, a.assignment) < within_cluster_ss(X, b.assignment),
    )


def sparse_kmeans(X: DataMatrix, n_clusters: int, T: float, cfg: Config):
    """Global-weight sparse K-means.

    Returns the best-of-restarts result (its tensor repeats the global vector
    on every pair) and the global weight vector itself.
    """
    check_budget(T, X.p)
    cfg = dataclasses.replace(cfg, n_clusters=n_clusters, T=T)

    def mstep(X_, z, warnings):
        g, F = global_m_step(X_, z, T, cfg.delta_search_iters)
        if not np.any(g):
            warnings.append("all clusters indistinguishable; global weights set to zero")
        return WeightTensor.replicate(g, n_clusters, T), F

    best = run_restarts(
        X,
        cfg,
        lambda r: _run_once(X, cfg, seeded_rng(cfg.seed, r), r, mstep, "sparse-kmeans"),
        lambda a, b: a.objective > b.objective,
    )
    return best, best.weights.weights[0].copy()
