"""Vertex-to-cluster mappings used by cluster-randomized designs."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .graph import Graph, bfs_distances


@dataclass(frozen=True, eq=False)
class Clustering:
    """Dense cluster ids, one per vertex.

    ``centers`` is set for epsilon-net clusterings: ``centers[c]`` is the net
    vertex that owns cluster ``c``.
    """

    assignment: np.ndarray
    n_clusters: int
    centers: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment, dtype=np.int64)
        object.__setattr__(self, "assignment", a)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a non-empty vector")
        if a.min() < 0 or a.max() >= self.n_clusters:
            raise ValueError(f"cluster ids must lie in [0, {self.n_clusters})")
        if np.unique(a).size != self.n_clusters:
            raise ValueError("cluster ids are not dense")

    @classmethod
    def from_labels(cls, labels) -> "Clustering":
        """Relabel arbitrary hashable labels densely, in order of first appearance."""
        ids: dict = {}
        dense = [ids.setdefault(lab, len(ids)) for lab in labels]
        return cls(np.array(dense, dtype=np.int64), len(ids))

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_clusters)

    def members(self) -> list[np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        bounds = np.cumsum(self.sizes)[:-1]
        return np.split(order, bounds)

    def membership_matrix(self) -> np.ndarray:
        """``n x n_clusters`` 0/1 matrix."""
        m = np.zeros((self.n, self.n_clusters), dtype=np.int64)
        m[np.arange(self.n), self.assignment] = 1
        return m

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Clustering):
            return NotImplemented
        return self.n_clusters == other.n_clusters and np.array_equal(
            self.assignment, other.assignment
        )


def singleton_clustering(n: int) -> Clustering:
    if n < 1:
        raise ValueError("n must be positive")
    return Clustering(np.arange(n, dtype=np.int64), n)


def single_cluster(n: int) -> Clustering:
    return Clustering(np.zeros(n, dtype=np.int64), 1)


def epsilon_net_clustering(g: Graph, eps: int, rng: np.random.Generator) -> Clustering:
    """Cluster around an epsilon-net built from a random vertex order.

    Vertices are visited in a uniformly random order; an unremoved vertex
    becomes a center and removes everything within ``eps - 1`` hops.  Each
    vertex then joins its closest center, ties going to the smaller center id.
    Cluster ids follow the order in which centers were picked.
    """
    eps = int(eps)
    if eps < 1:
        raise ValueError(f"eps must be a positive integer, got {eps}")
    if eps == 1:
        # every vertex is its own center; bfs would only return the source
        c = singleton_clustering(g.n)
        return Clustering(c.assignment, c.n_clusters, centers=np.arange(g.n))

    removed = np.zeros(g.n, dtype=bool)
    best_dist = np.full(g.n, np.iinfo(np.int64).max, dtype=np.int64)
    best_center = np.full(g.n, -1, dtype=np.int64)
    centers: list[int] = []
    balls: list[dict[int, int]] = []
    for v in rng.permutation(g.n):
        v = int(v)
        if removed[v]:
            continue
        ball = bfs_distances(g, v, eps - 1)
        centers.append(v)
        balls.append(ball)
        for u in ball:
            removed[u] = True

    for c_idx, (v, ball) in enumerate(zip(centers, balls)):
        for u, d in ball.items():
            if d < best_dist[u] or (d == best_dist[u] and v < centers[best_center[u]]):
                best_dist[u] = d
                best_center[u] = c_idx
    return Clustering(best_center, len(centers), centers=np.array(centers, dtype=np.int64))


@dataclass
class NetReport:
    ok: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.ok


def validate_net(
    g: Graph, c: Clustering, centers, eps: int, max_report: int = 20
) -> NetReport:
    """Check the epsilon-net clustering properties.

    (a) centers pairwise at least ``eps`` hops apart, (b) every vertex within
    ``eps - 1`` hops of a center, (c) every vertex in the cluster of one of its
    closest centers.  ``centers[k]`` must lie in cluster ``k``.
    """
    centers = [int(v) for v in centers]
    problems: list[str] = []
    if len(centers) != c.n_clusters:
        problems.append(f"{len(centers)} centers for {c.n_clusters} clusters")
        return NetReport(False, problems)
    for k, v in enumerate(centers):
        if c.assignment[v] != k:
            problems.append(f"center {v} is not in its own cluster {k}")

    dists = [bfs_distances(g, v) for v in centers]
    for a, b in combinations(range(len(centers)), 2):
        d = dists[a].get(centers[b])
        if d is not None and d < eps:
            problems.append(f"centers {centers[a]} and {centers[b]} are {d} < {eps} hops apart")

    for u in range(g.n):
        reach = [(dists[k][u], k) for k in range(len(centers)) if u in dists[k]]
        if not reach:
            problems.append(f"vertex {u} has no center in its component")
            continue
        dmin = min(d for d, _ in reach)
        if dmin > eps - 1:
            problems.append(f"vertex {u} is {dmin} > {eps - 1} hops from every center")
        own = c.assignment[u]
        if dists[own].get(u) != dmin:
            problems.append(f"vertex {u} is not assigned to a closest center")
        if len(problems) >= max_report:
            break
    return NetReport(not problems, problems)


def write_clustering(c: Clustering, path: str | Path) -> None:
    Path(path).write_text("".join(f"{int(x)}\n" for x in c.assignment))


def read_clustering(path: str | Path) -> Clustering:
    labels = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            labels.append(int(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: cluster id must be an integer") from None
    a = np.array(labels, dtype=np.int64)
    n_clusters = int(a.max()) + 1 if a.size else 0
    return Clustering(a, n_clusters)
