"""Per-pair weight maximization for a fixed assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Assignment,
    DataMatrix,
    InvalidArgumentError,
    WeightTensor,
    _pair_from_moments,
    all_pair_stats,
    check_budget,
    cluster_moments,
    cluster_pairs,
)


@dataclass(frozen=True)
class ThresholdSolution:
    w: np.ndarray
    delta: float
    objective_contribution: float


def pair_sufficient_stats(X: DataMatrix, z: Assignment, a: int, b: int) -> np.ndarray:
    """Sum over i in cluster a, j in cluster b of (X[i] - X[j])**2, per feature.

    Uses |C_b| sum_a x^2 + |C_a| sum_b x^2 - 2 (sum_a x)(sum_b x), so the cost
    is linear in n. Rounding residue below zero is clamped.
    """
    if a == b:
        raise InvalidArgumentError(f"pair statistics need two distinct clusters, got {a} twice")
    if z.n != X.n:
        raise InvalidArgumentError(f"assignment has {z.n} entries for {X.n} samples")
    for c in (a, b):
        if not 0 <= c < z.n_clusters:
            raise InvalidArgumentError(f"cluster {c} out of range for C={z.n_clusters}")
    counts, sums, sumsq = cluster_moments(X.values, z.labels, z.n_clusters)
    return _pair_from_moments(counts, sums, sumsq, a, b)


def soft_threshold(x, delta: float) -> np.ndarray:
    if delta < 0:
        raise InvalidArgumentError(f"delta must be non-negative, got {delta}")
    return np.maximum(np.asarray(x, dtype=np.float64) - delta, 0.0)


def _l1_over_l2(v: np.ndarray) -> float:
    return float(np.sum(v) / np.sqrt(np.sum(v * v)))


def _exact_threshold(s: np.ndarray, T: float, lo: float, hi: float):
    """Closed-form delta for the support {s > lo}, if it lands in [lo, hi].

    With r active entries of mean m and centred sum of squares V, the budget
    is met at m - delta = T sqrt(V / (r (r - T**2))). Working with deviations
    from m avoids the cancellation in s - delta when entries nearly tie.
    """
    active = s > lo
    r = int(np.count_nonzero(active))
    if r <= T * T:
        return None
    vals = s[active]
    m = vals.mean()
    dev = vals - m
    V = float(dev @ dev)
    gap = T * np.sqrt(V / (r * (r - T * T)))
    delta = m - gap
    if not (lo <= delta <= hi) or not np.all(dev + gap > 0):
        return None
    w = np.zeros_like(s)
    w[active] = dev + gap
    w /= np.sqrt(np.sum(w * w))
    if np.sum(w) > T + 1e-9:
        return None
    return float(delta), w


def solve_pair_weights(s, T: float, max_iter: int = 64) -> ThresholdSolution:
    """Maximize s.w subject to w >= 0, ||w||_1 <= T, ||w||_2 <= 1.

    The maximizer is S(s, delta) / ||S(s, delta)||_2 for the smallest delta >= 0
    meeting the L1 budget. ||S||_1 / ||S||_2 is non-increasing in delta, so the
    budget is located by bisection on [0, max(s) - eps], keeping the feasible
    end of the bracket, then refined in closed form on the bracketed support.

    An all-zero ``s`` yields all-zero weights. When the largest entry of ``s``
    is shared by m > T**2 features no normalized threshold fits the budget.
    Every unit vector on those features with L1 norm T is then optimal; the
    one returned gives the first tied feature weight x and the others an
    equal share y, with x >= y.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise InvalidArgumentError("s must be a non-empty vector")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InvalidArgumentError("s must be finite and non-negative")
    check_budget(T, s.size)

    top = float(s.max())
    if top == 0.0:
        return ThresholdSolution(np.zeros_like(s), 0.0, 0.0)

    def normalized(delta):
        v = soft_threshold(s, delta)
        return v / np.sqrt(np.sum(v * v))

    w = normalized(0.0)
    delta = 0.0
    if np.sum(w) > T:
        n_top = int(np.count_nonzero(s == top))
        if n_top > T * T:
            # x + (m-1) y = T and x^2 + (m-1) y^2 = 1
            m = n_top
            x = (T + np.sqrt((m - 1) * (m - T * T))) / m
            y = max((T - x) / (m - 1), 0.0)
            tied = np.flatnonzero(s == top)
            w = np.zeros_like(s)
            w[tied] = y
            w[tied[0]] = x
            delta = top
        else:
            eps = 1e-12 * top
            lo, hi = 0.0, top - eps
            if _l1_over_l2(soft_threshold(s, hi)) > T:
                # entries within eps of the maximum; at the runner-up value only
                # the tied maxima survive, which fits since n_top <= T**2
                hi = float(s[s < top].max())
            for _ in range(max_iter):
                if hi - lo < eps:
                    break
                mid = 0.5 * (lo + hi)
                if _l1_over_l2(soft_threshold(s, mid)) <= T:
                    hi = mid
                else:
                    lo = mid
            delta, w = hi, normalized(hi)
            polished = _exact_threshold(s, T, lo, hi)
            if polished is not None:
                delta, w = polished
    return ThresholdSolution(w, float(delta), float(s @ w))


def m_step(X: DataMatrix, z: Assignment, T: float, max_iter: int = 64, warnings: list | None = None):
    """Optimal weight tensor for assignment ``z`` and the resulting F(w, z).

    Pairs involving an empty cluster have s = 0 and get zero weights; a note is
    appended to ``warnings`` when a list is supplied.
    """
    check_budget(T, X.p)
    stats = all_pair_stats(X, z)
    sizes = z.sizes()
    weights = np.zeros_like(stats.values)
    contributions = []
    for row, (a, b) in enumerate(cluster_pairs(z.n_clusters)):
        if warnings is not None and (sizes[a] == 0 or sizes[b] == 0):
            warnings.append(f"cluster pair ({a},{b}) has an empty cluster; weights set to zero")
        elif warnings is not None and not np.any(stats.values[row]):
            warnings.append(f"cluster pair ({a},{b}) is indistinguishable; weights set to zero")
        sol = solve_pair_weights(stats.values[row], T, max_iter)
        weights[row] = sol.w
        contributions.append(sol.objective_contribution)
    return WeightTensor(z.n_clusters, T, weights), float(sum(contributions))


def global_m_step(X: DataMatrix, z: Assignment, T: float, max_iter: int = 64):
    """One weight vector shared by all pairs, fitted to the pair-summed s."""
    check_budget(T, X.p)
    stats = all_pair_stats(X, z)
    total = stats.values.sum(axis=0)
    sol = solve_pair_weights(total, T, max_iter)
    return sol.w, sol.objective_contribution
