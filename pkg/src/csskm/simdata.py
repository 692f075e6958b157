"""Synthetic block-signal benchmark.

The default spec is the canonical three-cluster dataset: 60 samples, 100
unit-normal features, and a +1.2 shift on features 0-9 of cluster 0,
10-19 of cluster 1 and 20-29 of cluster 2 (0-based, half-open ranges).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Assignment, DataMatrix, InvalidArgumentError, seeded_rng

# keeps simulation draws apart from clustering restarts that share a seed
SIMULATION_STREAM = 0xD1CE


def _default_blocks():
    return [(0, (0, 10)), (1, (10, 20)), (2, (20, 30))]


@dataclass
class SimSpec:
    n_per_cluster: list[int] = field(default_factory=lambda: [20, 20, 20])
    p: int = 100
    signal: float = 1.2
    blocks: list[tuple[int, tuple[int, int]]] = field(default_factory=_default_blocks)
    seed: int = 0

    def validate(self) -> None:
        if len(self.n_per_cluster) < 2:
            raise InvalidArgumentError("need at least two clusters")
        if any(int(m) < 1 for m in self.n_per_cluster):
            raise InvalidArgumentError("every cluster needs at least one sample")
        if self.p < 1:
            raise InvalidArgumentError("p must be positive")
        if not np.isfinite(self.signal):
            raise InvalidArgumentError("signal must be finite")
        for cluster, (lo, hi) in self.blocks:
            if not 0 <= cluster < len(self.n_per_cluster):
                raise InvalidArgumentError(f"block cluster {cluster} out of range")
            if not 0 <= lo < hi <= self.p:
                raise InvalidArgumentError(f"block range [{lo}, {hi}) outside [0, {self.p})")

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        d = dict(d)
        if "blocks" in d:
            d["blocks"] = [(int(c), (int(r[0]), int(r[1]))) for c, r in d["blocks"]]
        unknown = set(d) - {"n_per_cluster", "p", "signal", "blocks", "seed"}
        if unknown:
            raise InvalidArgumentError(f"unknown simulation fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "n_per_cluster": list(self.n_per_cluster),
            "p": self.p,
            "signal": self.signal,
            "blocks": [[c, [lo, hi]] for c, (lo, hi) in self.blocks],
            "seed": self.seed,
        }


def simulate(spec: SimSpec | None = None) -> tuple[DataMatrix, Assignment]:
    """Draw the data matrix and return it with the planted labels."""
    spec = spec or SimSpec()
    spec.validate()
    labels = np.repeat(np.arange(len(spec.n_per_cluster)), spec.n_per_cluster)
    rng = seeded_rng(spec.seed, SIMULATION_STREAM)
    values = rng.standard_normal((labels.size, spec.p))
    for cluster, (lo, hi) in spec.blocks:
        values[labels == cluster, lo:hi] += spec.signal
    sample_ids = [f"s{i}" for i in range(labels.size)]
    feature_names = [f"f{k}" for k in range(spec.p)]
    return DataMatrix(values, sample_ids, feature_names), Assignment(labels, len(spec.n_per_cluster))
