"""Threshold exposure conditions and exact exposure probabilities.

A vertex is effectively in global treatment (``side=1``) or global control
(``side=0``) when its own assignment equals ``side`` and at least ``l_i`` members
of its match set ``J_i`` also match ``side``.  Match sets are either the
neighbors (ITR, NTR, fractional NTR) or the clusters touching the
neighborhood, excluding the vertex's own cluster (cluster-level fractional NTR).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .clustering import Clustering
from .design import Design, GraphCluster, Independent, enumerate_support, MAX_ENUMERATION
from .graph import Graph

ITR, FNTR, NTR, CLUSTER_FNTR = "itr", "fntr", "ntr", "cluster_fntr"
_KINDS = (ITR, FNTR, NTR, CLUSTER_FNTR)

# lambda * k is compared against integers; absorb representation error such as 12 * (2 / 12)
_CEIL_SLACK = 1e-9


def ceil_threshold(lam: float, size) -> np.ndarray:
    size = np.asarray(size)
    return np.clip(np.ceil(lam * size - _CEIL_SLACK), 0, size).astype(np.int64)


@dataclass(frozen=True)
class ExposureSpec:
    kind: str = FNTR
    lam: float = 0.75

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown exposure kind {self.kind!r}")
        if self.kind == ITR:
            object.__setattr__(self, "lam", 0.0)
        elif self.kind == NTR:
            object.__setattr__(self, "lam", 1.0)
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")

    @classmethod
    def itr(cls) -> "ExposureSpec":
        return cls(ITR)

    @classmethod
    def ntr(cls) -> "ExposureSpec":
        return cls(NTR)

    @classmethod
    def fntr(cls, lam: float) -> "ExposureSpec":
        return cls(FNTR, lam)

    @classmethod
    def cluster_fntr(cls, lam: float) -> "ExposureSpec":
        return cls(CLUSTER_FNTR, lam)

    @property
    def cluster_level(self) -> bool:
        return self.kind == CLUSTER_FNTR

    @property
    def label(self) -> str:
        if self.kind in (ITR, NTR):
            return self.kind
        return f"{self.kind}(lam={self.lam:g})"

    def match_sets(self, g: Graph, c: Clustering | None = None) -> list[np.ndarray]:
        """``J_i`` for every vertex: neighbor ids, or cluster ids for the cluster-level kind."""
        if not self.cluster_level:
            return [g.neighbors(i) for i in range(g.n)]
        if c is None:
            raise ValueError("cluster-level exposure needs a clustering")
        a = c.assignment
        return [np.setdiff1d(np.unique(a[g.neighbors(i)]), [a[i]]) for i in range(g.n)]

    def thresholds(self, g: Graph, c: Clustering | None = None) -> np.ndarray:
        if self.kind == ITR:
            return np.zeros(g.n, dtype=np.int64)
        sizes = np.array([j.size for j in self.match_sets(g, c)])
        return ceil_threshold(self.lam, sizes)


@dataclass(frozen=True, eq=False)
class ExposureProbabilities:
    pi1: np.ndarray
    pi0: np.ndarray

    def side(self, side: int) -> np.ndarray:
        return self.pi1 if side == 1 else self.pi0

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["vertex", "pi1", "pi0"])
            for i, (p1, p0) in enumerate(zip(self.pi1, self.pi0)):
                out.writerow([i, repr(float(p1)), repr(float(p0))])


def effective_indicator(
    spec: ExposureSpec, g: Graph, c: Clustering | None, z, side: int, i: int
) -> bool:
    """Whether vertex ``i`` is in the effective global ``side`` condition under ``z``."""
    z = np.asarray(getattr(z, "z", z))
    if z[i] != side:
        return False
    if spec.kind == ITR:
        return True
    J = spec.match_sets(g, c)[i]
    l_i = int(ceil_threshold(spec.lam, J.size))
    if spec.cluster_level:
        members = c.members()
        matched = sum(bool(np.all(z[members[cl]] == side)) for cl in J)
    else:
        matched = int(np.sum(z[J] == side))
    return matched >= l_i


def effective_indicators(
    spec: ExposureSpec, g: Graph, c: Clustering | None, z, side: int
) -> np.ndarray:
    """Vectorized indicators for all vertices; ``z`` may be ``(n,)`` or ``(M, n)``."""
    z = np.asarray(getattr(z, "z", z))
    own = z == side
    if spec.kind == ITR:
        return own
    thresholds = spec.thresholds(g, c)
    if not spec.cluster_level:
        counts = (g.adjacency @ own.T.astype(np.float64)).T
    else:
        full = own.astype(np.int64) @ c.membership_matrix() == c.sizes
        jmat = np.zeros((c.n_clusters, g.n))
        for i, J in enumerate(spec.match_sets(g, c)):
            jmat[J, i] = 1.0
        counts = full.astype(np.float64) @ jmat
    return own & (counts >= thresholds - 0.5)


def exposure_prob_independent(g: Graph, spec: ExposureSpec, q: float) -> ExposureProbabilities:
    """Exposure probabilities under iid Bernoulli(q) vertex assignment."""
    if spec.cluster_level:
        raise ValueError("cluster-level exposure needs a cluster design")
    k = g.degrees
    l = spec.thresholds(g)
    pi1 = q * stats.binom.sf(l - 1, k, q)
    pi0 = (1 - q) * stats.binom.sf(l - 1, k, 1 - q)
    return ExposureProbabilities(np.asarray(pi1, float), np.asarray(pi0, float))


def _tail_by_convolution(base: int, weights: np.ndarray, p: float, threshold: int) -> float:
    """P(base + sum_c weights[c] * B_c >= threshold) for independent B_c ~ Bernoulli(p)."""
    need = threshold - base
    if need <= 0:
        return 1.0
    total = int(weights.sum())
    if need > total:
        return 0.0
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    reach = 0
    for w in weights:
        w = int(w)
        nxt = dist[: reach + w + 1] * (1 - p)
        nxt[w:] += dist[: reach + 1] * p
        dist[: reach + w + 1] = nxt
        reach += w
    return float(dist[need:].sum())


def exposure_prob_cluster(
    g: Graph, c: Clustering, spec: ExposureSpec, q: float
) -> ExposureProbabilities:
    """Exact exposure probabilities under graph cluster randomization.

    Given the ego's cluster on ``side``, neighbors in that cluster match
    automatically and each other cluster touching the neighborhood adds its
    neighbor count with probability ``P(W = side)``; the tail probability of
    that sum is computed by convolving over clusters.
    """
    if c.n != g.n:
        raise ValueError("clustering does not cover the graph")
    a = c.assignment
    l = spec.thresholds(g, c)
    pi = {1: np.empty(g.n), 0: np.empty(g.n)}
    if spec.cluster_level:
        sizes = np.array([J.size for J in spec.match_sets(g, c)])
        for side, p in ((1, q), (0, 1 - q)):
            pi[side] = p * stats.binom.sf(l - 1, sizes, p)
        return ExposureProbabilities(np.asarray(pi[1], float), np.asarray(pi[0], float))

    for i in range(g.n):
        nb_clusters = a[g.neighbors(i)]
        base = int(np.sum(nb_clusters == a[i]))
        _, counts = np.unique(nb_clusters[nb_clusters != a[i]], return_counts=True)
        for side, p in ((1, q), (0, 1 - q)):
            pi[side][i] = p * _tail_by_convolution(base, counts, p, int(l[i]))
    return ExposureProbabilities(pi[1], pi[0])


def exposure_prob_brute_force(
    g: Graph,
    d: Design,
    spec: ExposureSpec,
    clustering: Clustering | None = None,
    max_outcomes: int = MAX_ENUMERATION,
    chunk: int = 1 << 14,
) -> ExposureProbabilities:
    """Exposure probabilities by summing the design's probability over every outcome.

    ``clustering`` defines cluster-level match sets; it defaults to the
    design's own clustering.
    """
    c = clustering if clustering is not None else getattr(d, "clustering", None)
    z_all, prob = enumerate_support(d, g.n, max_outcomes=max_outcomes)
    pi1 = np.zeros(g.n)
    pi0 = np.zeros(g.n)
    for start in range(0, len(prob), chunk):
        z = z_all[start : start + chunk]
        p = prob[start : start + chunk]
        pi1 += p @ effective_indicators(spec, g, c, z, 1)
        pi0 += p @ effective_indicators(spec, g, c, z, 0)
    return ExposureProbabilities(pi1, pi0)


def exposure_probabilities(
    g: Graph, d: Design, spec: ExposureSpec, max_outcomes: int = MAX_ENUMERATION
) -> ExposureProbabilities:
    """Dispatch to the exact method available for the design."""
    if isinstance(d, Independent):
        return exposure_prob_independent(g, spec, d.q)
    if isinstance(d, GraphCluster):
        return exposure_prob_cluster(g, d.clustering, spec, d.q)
    return exposure_prob_brute_force(g, d, spec, max_outcomes=max_outcomes)

