"""Outer EM loop, initialization and multi-restart driver."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .core import (
    Assignment,
    ClusteringResult,
    Config,
    DataMatrix,
    InitMethod,
    InvalidArgumentError,
    WeightTensor,
    objective,
    seeded_rng,
)
from .estep import EStepResult, compute_centroids, nearest_centroid, weighted_kmeans
from .mstep import m_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationState:
    """Snapshot after one M-step.

    ``stale_objective`` is F evaluated with the previous weights on the new
    assignment (None for the initial M-step).
    """

    iteration: int
    assignment: Assignment
    weights: WeightTensor
    objective: float
    stale_objective: float | None
    estep: EStepResult | None


def _random_centers(values: np.ndarray, C: int, rng: np.random.Generator) -> np.ndarray:
    return values[np.sort(rng.choice(values.shape[0], C, replace=False))]


def _kmeans_pp_centers(values: np.ndarray, C: int, rng: np.random.Generator) -> np.ndarray:
    n = values.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((values - values[chosen[0]]) ** 2, axis=1)
    while len(chosen) < C:
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every remaining point duplicates a chosen center
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((values - values[nxt]) ** 2, axis=1))
    return values[chosen]


def _fill_empty(values: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Give each empty cluster the sample farthest from its centroid among
    clusters that can spare one (lowest index on ties)."""
    labels = labels.copy()
    C = centers.shape[0]
    for c in range(C):
        sizes = np.bincount(labels, minlength=C)
        if sizes[c]:
            continue
        d = np.sum((values - centers[labels]) ** 2, axis=1)
        d[sizes[labels] <= 1] = -np.inf
        labels[int(np.argmax(d))] = c
    return labels


def init_assignment(
    X: DataMatrix,
    n_clusters: int,
    method: InitMethod | str,
    rng: np.random.Generator,
) -> Assignment:
    """Seed C centers and assign every sample to its nearest one.

    Every cluster is guaranteed at least one member.
    """
    if n_clusters > X.n:
        raise InvalidArgumentError(f"cannot form {n_clusters} clusters from {X.n} samples")
    method = InitMethod(method)
    if method is InitMethod.RANDOM_POINTS:
        centers = _random_centers(X.values, n_clusters, rng)
    else:
        centers = _kmeans_pp_centers(X.values, n_clusters, rng)
    labels = nearest_centroid(X.values, centers)
    labels = _fill_empty(X.values, labels, centers)
    return Assignment(labels, n_clusters)


MStep = Callable[[DataMatrix, Assignment, list], tuple[WeightTensor, float]]


def _pairwise_m_step(cfg: Config) -> MStep:
    def step(X, z, warnings):
        return m_step(X, z, cfg.T, cfg.delta_search_iters, warnings)

    return step


def iterate(
    X: DataMatrix,
    cfg: Config,
    rng: np.random.Generator,
    warnings: list | None = None,
    mstep: MStep | None = None,
) -> Iterator[IterationState]:
    """Yield the state after the initial M-step and after every E/M round.

    Stops at convergence of F or after ``cfg.max_outer_iters`` rounds.
    """
    cfg.validate_for(X)
    warnings = [] if warnings is None else warnings
    mstep = mstep or _pairwise_m_step(cfg)

    z = init_assignment(X, cfg.n_clusters, cfg.init_method, rng)
    w, F = mstep(X, z, warnings)
    yield IterationState(0, z, w, F, None, None)

    for t in range(1, cfg.max_outer_iters + 1):
        if cfg.warm_start:
            mu = compute_centroids(X, z)
        else:
            mu = _random_centers(X.values, cfg.n_clusters, rng)
        est = weighted_kmeans(X, w, mu, cfg.max_inner_iters)
        if not est.converged:
            warnings.append(f"E-step hit the inner cap of {cfg.max_inner_iters} iterations")
        z = est.assignment
        stale = objective(X, z, w)
        w, F_new = mstep(X, z, warnings)
        yield IterationState(t, z, w, F_new, stale, est)
        if abs(F_new - F) <= cfg.rel_tol * max(abs(F), 1.0):
            return
        F = F_new


def _run_once(X, cfg, rng, restart_index, mstep, algorithm) -> ClusteringResult:
    warnings: list[str] = []
    trace = []
    state = None
    for state in iterate(X, cfg, rng, warnings, mstep):
        trace.append(state.objective)
    converged = len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= cfg.rel_tol * max(abs(trace[-2]), 1.0)
    if not converged:
        warnings.append(f"objective did not converge within {cfg.max_outer_iters} outer iterations")
    return ClusteringResult(
        assignment=state.assignment,
        weights=state.weights,
        objective_trace=tuple(trace),
        converged=converged,
        iterations=state.iteration,
        restart_index=restart_index,
        seed_used=cfg.seed,
        warnings=tuple(dict.fromkeys(warnings)),
        algorithm=algorithm,
    )


def csskm_once(X: DataMatrix, cfg: Config, rng: np.random.Generator, restart_index: int = 0) -> ClusteringResult:
    """One initialization followed by alternating E- and M-steps."""
    return _run_once(X, cfg, rng, restart_index, _pairwise_m_step(cfg), "csskm")


def run_restarts(X: DataMatrix, cfg: Config, run_one: Callable[[int], ClusteringResult], better) -> ClusteringResult:
    """Run restart streams 0..restarts-1 and reduce with ``better(a, b)``.

    The reduction walks results in restart order, so the winner does not
    depend on the thread count.
    """
    cfg.validate_for(X)
    streams = range(cfg.restarts)
    if cfg.threads > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run_one, streams))
    else:
        results = [run_one(r) for r in streams]
    best = results[0]
    for res in results[1:]:
        if better(res, best):
            best = res
    logger.debug("restart %d won with F=%g", best.restart_index, best.objective)
    return best


def csskm(X: DataMatrix, cfg: Config) -> ClusteringResult:
    """Best-of-restarts CSSKM: the run with the largest final F wins, ties to the lowest restart."""
    return run_restarts(
        X,
        cfg,
        lambda r: csskm_once(X, cfg, seeded_rng(cfg.seed, r), r),
        lambda a, b: a.objective > b.objective,
    )
