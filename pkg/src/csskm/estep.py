"""Assignment step: K-means driven by per-pair feature weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Assignment, DataMatrix, InvalidArgumentError, WeightTensor

# caps the n x C x p difference block held in memory at once
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class EStepResult:
    assignment: Assignment
    converged: bool
    iterations: int
    history: tuple[Assignment, ...]


def compute_centroids(
    X: DataMatrix,
    z: Assignment,
    previous: np.ndarray | None = None,
) -> np.ndarray:
    """Cluster means as a C x p array.

    An empty cluster is reseeded at the sample farthest (plain squared
    distance) from its previous centroid, or from the data mean when no
    previous centroids are given. Samples already used for a reseed are
    skipped; ties go to the lowest sample index.
    """
    if z.n != X.n:
        raise InvalidArgumentError(f"assignment has {z.n} entries for {X.n} samples")
    values = X.values
    C = z.n_clusters
    mu = np.zeros((C, X.p))
    used = np.zeros(X.n, dtype=bool)
    empty = []
    for c in range(C):
        members = z.labels == c
        if members.any():
            mu[c] = values[members].mean(axis=0)
        else:
            empty.append(c)
    for c in empty:
        ref = previous[c] if previous is not None else values.mean(axis=0)
        d = np.sum((values - ref) ** 2, axis=1)
        d[used] = -np.inf
        i = int(np.argmax(d))
        used[i] = True
        mu[c] = values[i]
    return mu


def _scores(values: np.ndarray, mu: np.ndarray, full_w: np.ndarray) -> np.ndarray:
    """score[i, c] = sum_{c' != c} sum_k w_{c,c'}[k] (x_ik - mu_c'k)**2."""
    n, p = values.shape
    C = mu.shape[0]
    out = np.empty((n, C))
    step = max(1, _CHUNK_ELEMENTS // max(1, C * p))
    for start in range(0, n, step):
        block = values[start : start + step]
        sq = (block[:, None, :] - mu[None, :, :]) ** 2
        # full_w has a zero diagonal, so the c' = c term drops out
        out[start : start + step] = np.einsum("cdk,idk->ic", full_w, sq)
    return out


def assign_points(values: np.ndarray, mu: np.ndarray, w: WeightTensor) -> np.ndarray:
    """Vectorized ``assign_point`` over the rows of ``values``."""
    return np.argmax(_scores(np.atleast_2d(values), mu, w.full()), axis=1)


def assign_point(x, mu, w: WeightTensor) -> int:
    """Cluster maximizing the weighted distance to every other cluster's centroid.

    Ties go to the lowest cluster index.
    """
    x = np.asarray(x, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if x.ndim != 1 or mu.ndim != 2 or mu.shape[1] != x.size or w.p != x.size:
        raise InvalidArgumentError("point, centroids and weights disagree on p")
    if mu.shape[0] != w.n_clusters:
        raise InvalidArgumentError("centroid count does not match the weight tensor")
    return int(assign_points(x[None, :], mu, w)[0])


def weighted_kmeans(
    X: DataMatrix,
    w: WeightTensor,
    init: np.ndarray,
    max_inner_iters: int = 100,
) -> EStepResult:
    """Alternate weighted assignment and centroid updates until no label changes."""
    mu = np.array(init, dtype=np.float64)
    if mu.shape != (w.n_clusters, X.p):
        raise InvalidArgumentError(
            f"init must have shape ({w.n_clusters}, {X.p}), got {mu.shape}"
        )
    full_w = w.full()
    return _lloyd(
        X,
        mu,
        lambda m: np.argmax(_scores(X.values, m, full_w), axis=1),
        w.n_clusters,
        max_inner_iters,
    )


def nearest_centroid(values: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Plain squared-Euclidean nearest centroid, lowest index on ties."""
    d = ((values[:, None, :] - mu[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d, axis=1)


def _lloyd(X, mu, assign, n_clusters, max_iters) -> EStepResult:
    history = []
    previous = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        z = Assignment(assign(mu), n_clusters)
        history.append(z)
        if previous is not None and z == previous:
            converged = True
            break
        mu = compute_centroids(X, z, previous=mu)
        previous = z
    return EStepResult(history[-1], converged, iterations, tuple(history))
