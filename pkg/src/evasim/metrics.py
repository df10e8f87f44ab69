"""Attack quality metrics over the set of effective attacks.

An attack sample is effective when the true defender labels it legitimate.
Accuracy is the effective attack rate (EAR); diversity is measured three
ways: scalar deviation around the centroid, mean distance to the K nearest
neighbors, and minimum-spanning-tree length per edge.  Sets with fewer than
two members score 0 on all diversity metrics by convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import LEGITIMATE

DEFAULT_K = 5


@dataclass(frozen=True)
class EffectiveAttackSet:
    """Attack samples the true defender labeled legitimate."""

    members: np.ndarray  # (m, d)
    total_attacks: int

    def __post_init__(self):
        members = np.atleast_2d(np.asarray(self.members, dtype=np.float64))
        if members.size == 0:
            members = members.reshape(0, members.shape[-1] if members.ndim else 0)
        if self.total_attacks < 1:
            raise ValueError("total_attacks must be >= 1")
        if members.shape[0] > self.total_attacks:
            raise ValueError("effective set larger than the attack set")
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return self.members.shape[0]


@dataclass(frozen=True)
class DiversityReport:
    ear: float
    sigma: float
    knn_dist: float
    mst_dist: float
    k_used: int

    def to_dict(self) -> dict:
        return {
            "ear": self.ear,
            "sigma": self.sigma,
            "knn_dist": self.knn_dist,
            "mst_dist": self.mst_dist,
            "k_used": self.k_used,
        }


def effective_attacks(defender_truth, attacks) -> EffectiveAttackSet:
    """Filter an attack set by the true defender's labels.

    ``defender_truth`` is the experimenter's privileged handle (a trained
    model, not a probe oracle): measuring effectiveness costs no budget and
    is not adversary knowledge.
    """
    samples = np.atleast_2d(np.asarray(getattr(attacks, "attacks", attacks),
                                       dtype=np.float64))
    labels = defender_truth.predict_batch(samples)
    return EffectiveAttackSet(
        members=samples[labels == LEGITIMATE], total_attacks=samples.shape[0]
    )


def ear(ea: EffectiveAttackSet) -> float:
    """Effective attack rate: |EA| / total attacks."""
    return ea.size / ea.total_attacks


def deviation(ea: EffectiveAttackSet) -> float:
    """sqrt of the (m-1)-normalized sum of squared distances to the centroid."""
    m = ea.size
    if m < 2:
        return 0.0
    centered = ea.members - ea.members.mean(axis=0)
    return float(np.sqrt((centered**2).sum() / (m - 1)))


def knn_dist(ea: EffectiveAttackSet, k: int = DEFAULT_K) -> float:
    """Mean over points of the mean distance to min(k, m-1) nearest neighbors."""
    if ea.size < 2:
        return 0.0
    return _knn_from_dist(cdist(ea.members, ea.members), k)


def _knn_from_dist(dist: np.ndarray, k: int) -> float:
    k_used = min(k, dist.shape[0] - 1)
    np.fill_diagonal(dist, np.inf)
    nearest = np.partition(dist, k_used - 1, axis=1)[:, :k_used]
    np.fill_diagonal(dist, 0.0)
    return float(nearest.mean())


def mst_dist(ea: EffectiveAttackSet) -> float:
    """Total minimum-spanning-tree edge length divided by (m - 1).

    Prim's algorithm over the complete Euclidean graph; duplicate points
    contribute zero-length edges (the set is a multiset, no deduplication).
    """
    m = ea.size
    if m < 2:
        return 0.0
    return float(_mst_total_from(cdist(ea.members, ea.members)) / (m - 1))


def _mst_total_from(dist: np.ndarray) -> float:
    n = dist.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    best[0] = np.inf
    total = 0.0
    for _ in range(n - 1):
        j = int(np.argmin(best))
        total += best[j]
        in_tree[j] = True
        np.minimum(best, dist[j], out=best)
        best[in_tree] = np.inf
    return total


def diversity_report(ea: EffectiveAttackSet, k: int = DEFAULT_K) -> DiversityReport:
    """All four quality metrics for one effective attack set.

    The pairwise distance matrix is computed once and shared by the KNN and
    MST metrics.
    """
    if ea.size < 2:
        return DiversityReport(
            ear=ear(ea), sigma=deviation(ea), knn_dist=0.0, mst_dist=0.0, k_used=0
        )
    dist = cdist(ea.members, ea.members)
    return DiversityReport(
        ear=ear(ea),
        sigma=deviation(ea),
        knn_dist=_knn_from_dist(dist, k),
        mst_dist=float(_mst_total_from(dist) / (ea.size - 1)),
        k_used=min(k, ea.size - 1),
    )
