"""Cluster-specific sparse K-means: K-means with per-feature, per-cluster-pair weights."""

from .baseline import kmeans, sparse_kmeans
from .core import (
    Assignment,
    ClusteringResult,
    Config,
    DataMatrix,
    InitMethod,
    InvalidArgumentError,
    PairStats,
    WeightTensor,
    objective,
    seeded_rng,
)
from .engine import csskm, csskm_once, init_assignment
from .estep import assign_point, compute_centroids, weighted_kmeans
from .evaluate import (
    adjusted_rand_index,
    confusion_matrix,
    hypergeometric_enrichment,
    match_accuracy,
    selected_features,
)
from .mstep import m_step, pair_sufficient_stats, soft_threshold, solve_pair_weights
from .simdata import SimSpec, simulate

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ClusteringResult",
    "Config",
    "DataMatrix",
    "InitMethod",
    "InvalidArgumentError",
    "PairStats",
    "SimSpec",
    "WeightTensor",
    "adjusted_rand_index",
    "assign_point",
    "compute_centroids",
    "confusion_matrix",
    "csskm",
    "csskm_once",
    "hypergeometric_enrichment",
    "init_assignment",
    "kmeans",
    "m_step",
    "match_accuracy",
    "objective",
    "pair_sufficient_stats",
    "seeded_rng",
    "selected_features",
    "simulate",
    "soft_threshold",
    "solve_pair_weights",
    "sparse_kmeans",
    "weighted_kmeans",
]
