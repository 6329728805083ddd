"""Treatment assignment designs: independent, graph cluster, balanced and hole-punched."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .clustering import Clustering


class DesignError(ValueError):
    pass


def _check_prob(name: str, value: float, open_interval: bool = True) -> None:
    ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    if not ok:
        raise DesignError(f"{name} must lie in {'(0, 1)' if open_interval else '[0, 1]'}, got {value}")


@dataclass(frozen=True, eq=False)
class Independent:
    q: float = 0.5

    def __post_init__(self) -> None:
        _check_prob("q", self.q)

    @property
    def label(self) -> str:
        return f"independent(q={self.q:g})"


@dataclass(frozen=True, eq=False)
class GraphCluster:
    clustering: Clustering
    q: float = 0.5

    def __post_init__(self) -> None:
        _check_prob("q", self.q)

    @property
    def label(self) -> str:
        return f"cluster(q={self.q:g})"


@dataclass(frozen=True, eq=False)
class BalancedGraphCluster:
    """Exactly half of the clusters treated, chosen uniformly at random."""

    clustering: Clustering

    def __post_init__(self) -> None:
        if self.clustering.n_clusters % 2:
            raise DesignError(
                f"balanced design needs an even cluster count, got {self.clustering.n_clusters}"
            )

    @property
    def q(self) -> float:
        return 0.5

    @property
    def label(self) -> str:
        return "balanced_cluster"


@dataclass(frozen=True, eq=False)
class HolePunched:
    """Cluster assignment where each vertex keeps its cluster's arm with probability ``eta``.

    ``cluster_q`` optionally gives a per-cluster treatment probability; it
    defaults to ``q`` for every cluster.
    """

    clustering: Clustering
    q: float = 0.5
    eta: float = 0.95
    cluster_q: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        _check_prob("eta", self.eta, open_interval=False)
        if self.cluster_q is None:
            _check_prob("q", self.q, open_interval=False)
            cq = np.full(self.clustering.n_clusters, float(self.q))
        else:
            cq = np.asarray(self.cluster_q, dtype=np.float64)
            if cq.shape != (self.clustering.n_clusters,):
                raise DesignError("cluster_q needs one probability per cluster")
            if np.any((cq < 0) | (cq > 1)):
                raise DesignError("cluster_q entries must lie in [0, 1]")
        object.__setattr__(self, "cluster_q", cq)

    @property
    def label(self) -> str:
        return f"hole_punched(q={self.q:g},eta={self.eta:g})"


Design = Independent | GraphCluster | BalancedGraphCluster | HolePunched


@dataclass(frozen=True, eq=False)
class Assignment:
    """Drawn vertex treatments ``z`` with the cluster draw ``w`` and keep switches ``x``."""

    z: np.ndarray
    w: np.ndarray | None = None
    x: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.z.size)

    def write(self, path: str | Path) -> None:
        Path(path).write_text("".join(f"{int(v)}\n" for v in self.z))


def draw_assignment(d: Design, rng: np.random.Generator, n: int | None = None) -> Assignment:
    """Draw one assignment.  ``n`` is required only for :class:`Independent`."""
    if isinstance(d, Independent):
        if n is None:
            raise DesignError("independent design needs the vertex count n")
        z = (rng.random(n) < d.q).astype(np.int8)
        return Assignment(z)
    c = d.clustering
    if n is not None and n != c.n:
        raise DesignError(f"clustering covers {c.n} vertices, expected {n}")
    if isinstance(d, GraphCluster):
        w = (rng.random(c.n_clusters) < d.q).astype(np.int8)
        return Assignment(w[c.assignment], w)
    if isinstance(d, BalancedGraphCluster):
        w = np.zeros(c.n_clusters, dtype=np.int8)
        w[rng.choice(c.n_clusters, size=c.n_clusters // 2, replace=False)] = 1
        return Assignment(w[c.assignment], w)
    if isinstance(d, HolePunched):
        w = (rng.random(c.n_clusters) < d.cluster_q).astype(np.int8)
        x = (rng.random(c.n) < d.eta).astype(np.int8)
        wc = w[c.assignment]
        z = (x * wc + (1 - x) * (1 - wc)).astype(np.int8)
        return Assignment(z, w, x)
    raise TypeError(f"unknown design {d!r}")


def _bernoulli_logp(bits: np.ndarray, p) -> float:
    p = np.broadcast_to(np.asarray(p, dtype=np.float64), bits.shape)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.where(bits == 1, np.log(p), np.log1p(-p))))


def assignment_log_prob(d: Design, a: Assignment) -> float:
    """Log-probability of the randomization outcome recorded in ``a``.

    For cluster designs this is the probability of the cluster vector ``w``
    (and, for hole punching, of the switches ``x``).
    """
    z = np.asarray(a.z)
    if np.any((z != 0) & (z != 1)):
        raise DesignError("assignment entries must be 0 or 1")
    if isinstance(d, Independent):
        return _bernoulli_logp(z, d.q)

    c = d.clustering
    if z.size != c.n:
        raise DesignError(f"assignment has {z.size} entries, clustering covers {c.n}")
    w = a.w
    if w is None:
        if isinstance(d, HolePunched):
            raise DesignError("hole-punched assignments must carry w and x")
        w = np.zeros(c.n_clusters, dtype=np.int8)
        w[c.assignment] = z
    w = np.asarray(w)
    if w.shape != (c.n_clusters,):
        raise DesignError("cluster vector has the wrong length")

    if isinstance(d, HolePunched):
        if a.x is None:
            raise DesignError("hole-punched assignments must carry x")
        x = np.asarray(a.x)
        wc = w[c.assignment]
        if not np.array_equal(z, x * wc + (1 - x) * (1 - wc)):
            raise DesignError("z is inconsistent with (w, x)")
        return _bernoulli_logp(w, d.cluster_q) + _bernoulli_logp(x, d.eta)

    if not np.array_equal(z, w[c.assignment]):
        raise DesignError("z is not constant within clusters or disagrees with w")
    if isinstance(d, GraphCluster):
        return _bernoulli_logp(w, d.q)
    if isinstance(d, BalancedGraphCluster):
        if int(w.sum()) != c.n_clusters // 2:
            raise DesignError("balanced assignment must treat exactly half the clusters")
        return -math.log(math.comb(c.n_clusters, c.n_clusters // 2))
    raise TypeError(f"unknown design {d!r}")


def support_size(d: Design, n: int | None = None) -> int:
    if isinstance(d, Independent):
        return 2 ** int(n)
    c = d.clustering
    if isinstance(d, GraphCluster):
        return 2**c.n_clusters
    if isinstance(d, BalancedGraphCluster):
        return math.comb(c.n_clusters, c.n_clusters // 2)
    if isinstance(d, HolePunched):
        return 2 ** (c.n_clusters + c.n)
    raise TypeError(f"unknown design {d!r}")


MAX_ENUMERATION = 2**20


def _bit_rows(m: int) -> np.ndarray:
    """All 0/1 vectors of length ``m`` as rows, first coordinate varying slowest."""
    shifts = np.arange(m - 1, -1, -1)
    return ((np.arange(2**m)[:, None] >> shifts) & 1).astype(np.int8)


def enumerate_support(
    d: Design, n: int | None = None, max_outcomes: int = MAX_ENUMERATION
) -> tuple[np.ndarray, np.ndarray]:
    """Every randomization outcome of ``d`` as ``(Z, prob)``.

    ``Z`` has one row per outcome (vertex assignments); outcomes with equal
    ``z`` but different hidden draws (hole punching) appear separately.
    Refuses designs with more than ``max_outcomes`` outcomes.
    """
    size = support_size(d, n)
    if size > max_outcomes:
        raise DesignError(f"design has {size} outcomes, enumeration limit is {max_outcomes}")
    if isinstance(d, Independent):
        z = _bit_rows(int(n))
        k = z.sum(axis=1)
        return z, d.q**k * (1 - d.q) ** (z.shape[1] - k)
    c = d.clustering
    if isinstance(d, GraphCluster):
        w = _bit_rows(c.n_clusters)
        k = w.sum(axis=1)
        return w[:, c.assignment], d.q**k * (1 - d.q) ** (c.n_clusters - k)
    if isinstance(d, BalancedGraphCluster):
        rows = []
        for treated in combinations(range(c.n_clusters), c.n_clusters // 2):
            w = np.zeros(c.n_clusters, dtype=np.int8)
            w[list(treated)] = 1
            rows.append(w)
        w = np.array(rows)
        return w[:, c.assignment], np.full(len(rows), 1.0 / len(rows))
    if isinstance(d, HolePunched):
        w = _bit_rows(c.n_clusters)
        x = _bit_rows(c.n)
        pw = np.prod(np.where(w == 1, d.cluster_q, 1 - d.cluster_q), axis=1)
        kx = x.sum(axis=1)
        px = d.eta**kx * (1 - d.eta) ** (c.n - kx)
        wc = w[:, c.assignment]
        z = x[None, :, :] * wc[:, None, :] + (1 - x[None, :, :]) * (1 - wc[:, None, :])
        return z.reshape(-1, c.n).astype(np.int8), (pw[:, None] * px[None, :]).ravel()
    raise TypeError(f"unknown design {d!r}")


def marginal_treatment_prob(d: Design) -> float | np.ndarray:
    """``E[Z_i]``; a per-vertex vector for hole punching with per-cluster ``q``."""
    if isinstance(d, (Independent, GraphCluster)):
        return d.q
    if isinstance(d, BalancedGraphCluster):
        return 0.5
    if isinstance(d, HolePunched):
        q = d.cluster_q[d.clustering.assignment]
        return d.eta * q + (1 - d.eta) * (1 - q)
    raise TypeError(f"unknown design {d!r}")
