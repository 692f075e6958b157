"""Domain types, the weighted cross-cluster objective and seeded randomness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Sequence

import numpy as np

L1_TOL = 1e-6
L2_TOL = 1e-6


class InvalidArgumentError(ValueError):
    """Raised when inputs violate an operation's preconditions."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def cluster_pairs(n_clusters: int) -> list[tuple[int, int]]:
    """Unordered cluster pairs ``(a, b)`` with ``a < b``, in lexicographic order."""
    return list(combinations(range(n_clusters), 2))


def pair_index(a: int, b: int, n_clusters: int) -> int:
    """Row of pair ``{a, b}`` in the lexicographic pair ordering."""
    if a == b:
        raise InvalidArgumentError(f"pair needs two distinct clusters, got ({a}, {b})")
    if a > b:
        a, b = b, a
    if not 0 <= a < b < n_clusters:
        raise InvalidArgumentError(f"pair ({a}, {b}) out of range for C={n_clusters}")
    # rows for pairs starting at a' < a, then the offset inside block a
    return a * n_clusters - a * (a + 1) // 2 + (b - a - 1)


def _check_names(names, length, what):
    if names is None:
        return None
    names = tuple(str(x) for x in names)
    if len(names) != length:
        raise InvalidArgumentError(f"{what} has {len(names)} entries, expected {length}")
    if len(set(names)) != len(names):
        raise InvalidArgumentError(f"{what} entries must be unique")
    return names


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An n x p matrix of observations (rows are samples)."""

    values: np.ndarray
    sample_ids: tuple[str, ...] | None = None
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise InvalidArgumentError(f"data must be 2-d, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidArgumentError(f"data must be non-empty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("data contains NaN or infinite entries")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "sample_ids", _check_names(self.sample_ids, values.shape[0], "sample_ids"))
        object.__setattr__(
            self, "feature_names", _check_names(self.feature_names, values.shape[1], "feature_names")
        )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def transpose(self) -> "DataMatrix":
        return DataMatrix(self.values.T, self.feature_names, self.sample_ids)


@dataclass(frozen=True, eq=False)
class Assignment:
    """Cluster label per sample. Clusters may be empty; labels lie in [0, n_clusters)."""

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        labels = np.array(self.labels, copy=True)
        if labels.ndim != 1 or labels.size == 0:
            raise InvalidArgumentError("assignment must be a non-empty 1-d sequence")
        if labels.dtype.kind == "f":
            if not np.all(labels == np.round(labels)):
                raise InvalidArgumentError("cluster labels must be integers")
        elif labels.dtype.kind not in "iu":
            raise InvalidArgumentError("cluster labels must be integers")
        labels = labels.astype(np.int64)
        if self.n_clusters < 2:
            raise InvalidArgumentError(f"need at least 2 clusters, got {self.n_clusters}")
        if labels.min() < 0 or labels.max() >= self.n_clusters:
            raise InvalidArgumentError(f"labels must lie in [0, {self.n_clusters})")
        object.__setattr__(self, "labels", _readonly(labels))
        object.__setattr__(self, "n_clusters", int(self.n_clusters))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Assignment":
        """Build from raw labels, taking C as max label + 1 (at least 2)."""
        labels = np.asarray(labels, dtype=np.int64)
        return cls(labels, max(int(labels.max()) + 1, 2))

    @property
    def n(self) -> int:
        return self.labels.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.n_clusters == other.n_clusters and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.n_clusters, self.labels.tobytes()))


@dataclass(frozen=True, eq=False)
class WeightTensor:
    """Per-pair feature weights; row ``pair_index(a, b)`` of ``weights`` holds w_{a,b}."""

    n_clusters: int
    T: float
    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        n_pairs = self.n_clusters * (self.n_clusters - 1) // 2
        if weights.ndim != 2 or weights.shape[0] != n_pairs:
            raise InvalidArgumentError(
                f"weights must have shape ({n_pairs}, p) for C={self.n_clusters}, got {weights.shape}"
            )
        object.__setattr__(self, "weights", _readonly(weights))
        object.__setattr__(self, "T", float(self.T))

    @property
    def p(self) -> int:
        return self.weights.shape[1]

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return cluster_pairs(self.n_clusters)

    def pair(self, a: int, b: int) -> np.ndarray:
        return self.weights[pair_index(a, b, self.n_clusters)]

    def full(self) -> np.ndarray:
        """Symmetric C x C x p array with zero diagonal."""
        C = self.n_clusters
        out = np.zeros((C, C, self.p))
        for row, (a, b) in enumerate(self.pairs):
            out[a, b] = out[b, a] = self.weights[row]
        return out

    def __add__(self, other: "WeightTensor") -> "WeightTensor":
        # only meaningful for linearity checks; the sum is generally infeasible
        return WeightTensor(self.n_clusters, self.T + other.T, self.weights + other.weights)

    def __eq__(self, other):
        if not isinstance(other, WeightTensor):
            return NotImplemented
        return (
            self.n_clusters == other.n_clusters
            and self.T == other.T
            and np.array_equal(self.weights, other.weights)
        )

    def violations(self, tol: float = L1_TOL) -> list[str]:
        """Constraint violations per pair; an empty list means the tensor is feasible."""
        problems = []
        for (a, b), w in zip(self.pairs, self.weights):
            if np.any(w < 0):
                problems.append(f"pair ({a},{b}) has negative weights")
            l1 = float(np.sum(w))
            if l1 > self.T + tol:
                problems.append(f"pair ({a},{b}) L1 {l1:.9g} exceeds T={self.T:.9g}")
            l2 = float(np.sqrt(np.sum(w * w)))
            if l2 > 1 + tol:
                problems.append(f"pair ({a},{b}) L2 {l2:.9g} exceeds 1")
        return problems

    def is_normalized(self, tol: float = L2_TOL) -> bool:
        """True when every pair vector is all-zero or has unit L2 norm."""
        norms = np.sqrt(np.sum(self.weights**2, axis=1))
        zero = np.all(self.weights == 0, axis=1)
        return bool(np.all(zero | (np.abs(norms - 1) <= tol)))

    @classmethod
    def zeros(cls, n_clusters: int, p: int, T: float) -> "WeightTensor":
        return cls(n_clusters, T, np.zeros((n_clusters * (n_clusters - 1) // 2, p)))

    @classmethod
    def uniform(cls, n_clusters: int, p: int) -> "WeightTensor":
        """Every pair gets (1/sqrt(p), ..., 1/sqrt(p)), feasible for T = sqrt(p)."""
        n_pairs = n_clusters * (n_clusters - 1) // 2
        return cls(n_clusters, math.sqrt(p), np.full((n_pairs, p), 1 / math.sqrt(p)))

    @classmethod
    def replicate(cls, vector: np.ndarray, n_clusters: int, T: float) -> "WeightTensor":
        """The same weight vector on every cluster pair."""
        vector = np.asarray(vector, dtype=np.float64)
        n_pairs = n_clusters * (n_clusters - 1) // 2
        return cls(n_clusters, T, np.tile(vector, (n_pairs, 1)))


@dataclass(frozen=True, eq=False)
class PairStats:
    """Cross-pair squared-difference sums; row ``pair_index(a, b)`` holds s_{a,b}."""

    n_clusters: int
    values: np.ndarray

    def pair(self, a: int, b: int) -> np.ndarray:
        return self.values[pair_index(a, b, self.n_clusters)]


class InitMethod(str, Enum):
    RANDOM_POINTS = "random_points"
    KMEANS_PP = "kmeans_pp"


@dataclass(frozen=True)
class Config:
    n_clusters: int
    T: float
    max_outer_iters: int = 50
    max_inner_iters: int = 100
    restarts: int = 10
    seed: int = 0
    rel_tol: float = 1e-3
    delta_search_iters: int = 64
    init_method: InitMethod = InitMethod.KMEANS_PP
    warm_start: bool = True
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "init_method", InitMethod(self.init_method))
        if self.n_clusters < 2:
            raise InvalidArgumentError(f"need at least 2 clusters, got {self.n_clusters}")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        for name in ("max_outer_iters", "max_inner_iters", "restarts", "delta_search_iters", "threads"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be at least 1")
        if not self.rel_tol >= 0:
            raise InvalidArgumentError("rel_tol must be non-negative")

    def validate_for(self, data: DataMatrix) -> None:
        if self.n_clusters > data.n:
            raise InvalidArgumentError(
                f"cannot form {self.n_clusters} clusters from {data.n} samples"
            )
        check_budget(self.T, data.p)


def check_budget(T: float, p: int) -> None:
    upper = math.sqrt(p)
    if not (1.0 <= T <= upper * (1 + 1e-12)):
        raise InvalidArgumentError(
            f"T={T} outside the valid range [1, sqrt(p)] = [1, {upper:.6g}] for p={p}"
        )


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    assignment: Assignment
    weights: WeightTensor
    objective_trace: tuple[float, ...]
    converged: bool
    iterations: int
    restart_index: int = 0
    seed_used: int = 0
    warnings: tuple[str, ...] = field(default_factory=tuple)
    algorithm: str = "csskm"

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for ``(seed, stream)``.

    Philox is counter-based, so the sequence is fixed across platforms; the
    stream id enters through the seed sequence's spawn key, which gives
    statistically independent streams for distinct ids.
    """
    if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
        raise InvalidArgumentError("seed and stream must be unsigned 64-bit integers")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def cluster_moments(values: np.ndarray, labels: np.ndarray, n_clusters: int):
    """Per-cluster counts, column sums and column sums of squares.

    Columns are centred on the overall mean first; squared differences are
    shift-invariant and centring limits cancellation in the s identity.
    """
    centred = values - values.mean(axis=0)
    p = values.shape[1]
    counts = np.zeros(n_clusters)
    sums = np.zeros((n_clusters, p))
    sumsq = np.zeros((n_clusters, p))
    for c in range(n_clusters):
        block = centred[labels == c]
        counts[c] = block.shape[0]
        if block.shape[0]:
            sums[c] = block.sum(axis=0)
            sumsq[c] = (block * block).sum(axis=0)
    return counts, sums, sumsq


def _pair_from_moments(counts, sums, sumsq, a, b) -> np.ndarray:
    s = counts[b] * sumsq[a] + counts[a] * sumsq[b] - 2.0 * sums[a] * sums[b]
    return np.maximum(s, 0.0)


def all_pair_stats(X: DataMatrix, z: Assignment) -> PairStats:
    """s_{a,b} for every pair, from per-cluster sufficient statistics in O(n p)."""
    if z.n != X.n:
        raise InvalidArgumentError(f"assignment has {z.n} entries for {X.n} samples")
    counts, sums, sumsq = cluster_moments(X.values, z.labels, z.n_clusters)
    pairs = cluster_pairs(z.n_clusters)
    values = np.empty((len(pairs), X.p))
    for row, (a, b) in enumerate(pairs):
        values[row] = _pair_from_moments(counts, sums, sumsq, a, b)
    return PairStats(z.n_clusters, _readonly(values))


def objective(X: DataMatrix, z: Assignment, w: WeightTensor) -> float:
    """F(w, z): weighted squared differences summed over cross-cluster sample pairs.

    Equals half the sum over ordered pairs (i, j) with z(i) != z(j) of
    sum_k w_{z(i),z(j)}[k] (X[i,k] - X[j,k])**2, evaluated as sum over a < b of
    w_{a,b} . s_{a,b}.
    """
    if z.n != X.n:
        raise InvalidArgumentError(f"assignment has {z.n} entries for {X.n} samples")
    if w.n_clusters != z.n_clusters:
        raise InvalidArgumentError(
            f"weights are for C={w.n_clusters}, assignment has C={z.n_clusters}"
        )
    if w.p != X.p:
        raise InvalidArgumentError(f"weights have p={w.p}, data has p={X.p}")
    stats = all_pair_stats(X, z)
    per_pair = np.einsum("ij,ij->i", w.weights, stats.values)
    return float(sum(per_pair.tolist()))
