"""External validity scores and feature-set enrichment."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from .core import Assignment, InvalidArgumentError, WeightTensor

MAX_MATCH_CLUSTERS = 10


def _check_pair(pred: Assignment, truth: Assignment) -> None:
    if pred.n != truth.n:
        raise InvalidArgumentError(f"assignments differ in length: {pred.n} vs {truth.n}")


def contingency(pred: Assignment, truth: Assignment) -> np.ndarray:
    """Counts table with predicted clusters as rows and true labels as columns."""
    _check_pair(pred, truth)
    table = np.zeros((pred.n_clusters, truth.n_clusters), dtype=np.int64)
    np.add.at(table, (pred.labels, truth.labels), 1)
    return table


def match_accuracy(pred: Assignment, truth: Assignment) -> tuple[float, dict[int, int]]:
    """Fraction correct under the overlap-maximizing one-to-one cluster-to-label map.

    Clusters left without a label (more clusters than labels) count as wrong
    and are absent from the returned mapping.
    """
    _check_pair(pred, truth)
    if pred.n_clusters > MAX_MATCH_CLUSTERS or truth.n_clusters > MAX_MATCH_CLUSTERS:
        raise InvalidArgumentError(f"matching supports at most {MAX_MATCH_CLUSTERS} clusters")
    table = contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    mapping = {int(r): int(c) for r, c in zip(rows, cols)}
    correct = int(table[rows, cols].sum())
    return correct / pred.n, mapping


def confusion_matrix(pred: Assignment, truth: Assignment, mapping: dict[int, int]) -> np.ndarray:
    """Contingency table with rows reordered so cluster ``c`` sits at row ``mapping[c]``.

    Unmapped clusters follow in index order. With a perfect clustering the
    result is diagonal.
    """
    table = contingency(pred, truth)
    order = sorted(range(pred.n_clusters), key=lambda c: (mapping.get(c, truth.n_clusters + c), c))
    return table[order]


def adjusted_rand_index(pred: Assignment, truth: Assignment) -> float:
    _check_pair(pred, truth)
    table = contingency(pred, truth)

    def pairs(x):
        x = np.asarray(x, dtype=np.float64)
        return float(np.sum(x * (x - 1) / 2))

    index = pairs(table)
    a = pairs(table.sum(axis=1))
    b = pairs(table.sum(axis=0))
    total = pred.n * (pred.n - 1) / 2
    if total == 0:
        return 1.0
    expected = a * b / total
    max_index = (a + b) / 2
    if max_index == expected:
        # both partitions trivial (all singletons or one block)
        return 1.0
    return (index - expected) / (max_index - expected)


@dataclass(frozen=True)
class FeatureSelection:
    features: frozenset[int]
    per_pair: dict[tuple[int, int], frozenset[int]]


def selected_features(w: WeightTensor, threshold: float = 0.0) -> FeatureSelection:
    """Features whose weight exceeds ``threshold`` for at least one pair."""
    per_pair = {
        pair: frozenset(int(k) for k in np.flatnonzero(row > threshold))
        for pair, row in zip(w.pairs, w.weights)
    }
    union = frozenset().union(*per_pair.values()) if per_pair else frozenset()
    return FeatureSelection(union, per_pair)


def _log_ratio(num: int, den: int) -> float:
    """log(num / den) for positive integers of any size.

    The quotient is scaled by a power of two into [1, 2) with exact integer
    shifts, so the only rounding is in one float division and one log.
    """
    e = den.bit_length() - num.bit_length()
    if e >= 0:
        m = (num << e) / den
    else:
        m = num / (den << -e)
    return math.log(m) - e * math.log(2.0)


def hypergeometric_log_pmf(N: int, K: int, n: int, k: int) -> float:
    """log P[X = k] for X ~ Hypergeometric(population N, K successes, n draws).

    Binomials are exact integers; outside the support the result is -inf.
    """
    num = math.comb(K, k) * math.comb(N - K, n - k) if 0 <= k <= K and 0 <= n - k <= N - K else 0
    if num == 0:
        return -math.inf
    return _log_ratio(num, math.comb(N, n))


def hypergeometric_log_pmf_support(N: int, K: int, n: int) -> tuple[int, np.ndarray]:
    """log-pmf over the whole support, returned as (lowest k, values).

    Walks the exact integer recurrence between neighbouring numerators, so
    the cost is one large binomial rather than one per support point.
    """
    lo, hi = max(0, n - (N - K)), min(K, n)
    den = math.comb(N, n)
    num = math.comb(K, lo) * math.comb(N - K, n - lo)
    out = np.empty(hi - lo + 1)
    for j, k in enumerate(range(lo, hi + 1)):
        out[j] = _log_ratio(num, den)
        if k < hi:
            num = num * (K - k) * (n - k) // ((k + 1) * (N - K - n + k + 1))
    return lo, out


def hypergeometric_enrichment(N: int, K: int, n: int, k: int) -> float:
    """Upper tail P[X >= k]: the one-sided Fisher exact p-value for an overlap of k.

    N features in total, K of them in the reference set, n selected.
    """
    for name, v in (("N", N), ("K", K), ("n", n), ("k", k)):
        if int(v) != v or v < 0:
            raise InvalidArgumentError(f"{name} must be a non-negative integer, got {v}")
    if K > N or n > N:
        raise InvalidArgumentError(f"need K <= N and n <= N, got N={N}, K={K}, n={n}")
    if k > min(K, n):
        raise InvalidArgumentError(f"overlap k={k} exceeds min(K, n)={min(K, n)}")
    lower = max(0, n - (N - K))
    if k <= lower:
        return 1.0
    lo, logpmf = hypergeometric_log_pmf_support(N, K, n)
    return float(min(1.0, math.exp(logsumexp(logpmf[k - lo:]))))
