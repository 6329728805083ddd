"""Undirected simple graphs, random graph generators and structural utilities.

Graphs are stored as compressed adjacency lists (``indptr``/``indices``), with
each vertex's neighbors sorted and distinct.  They are immutable once built and
can be shared freely between replications.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp
from scipy import optimize


class GraphError(ValueError):
    """Invalid graph data or generator configuration."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``indices[indptr[i]:indptr[i+1]]`` holds the sorted neighbors of ``i``.
    Use :meth:`from_edges` rather than the constructor unless the arrays are
    already known to be valid.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        n = int(n)
        if n < 1:
            raise GraphError(f"vertex count must be positive, got {n}")
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphError(f"vertex ids must lie in [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            raise GraphError("duplicate edges are not allowed")
        return cls._from_unique_pairs(n, lo, hi)

    @classmethod
    def _from_unique_pairs(cls, n: int, lo: np.ndarray, hi: np.ndarray) -> "Graph":
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst.astype(np.int64))

    @classmethod
    def from_adjacency_lists(cls, neighbors: list[Iterable[int]]) -> "Graph":
        n = len(neighbors)
        sets = [set(int(j) for j in nb) for nb in neighbors]
        for i, nb in enumerate(sets):
            if i in nb:
                raise GraphError(f"self-loop at vertex {i}")
            for j in nb:
                if not 0 <= j < n:
                    raise GraphError(f"vertex id {j} out of range")
                if i not in sets[j]:
                    raise GraphError(f"asymmetric adjacency between {i} and {j}")
        edges = [(i, j) for i, nb in enumerate(sets) for j in nb if i < j]
        return cls.from_edges(n, edges)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return int(self.indices.size // 2)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as ``(i, j)`` with ``i < j``."""
        for i in range(self.n):
            for j in self.neighbors(i):
                if i < j:
                    yield i, int(j)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    @cached_property
    def peer_operator(self) -> sp.csr_matrix:
        """Row-normalized adjacency ``D^-1 A``; rows of isolated vertices are zero."""
        deg = self.degrees.astype(np.float64)
        inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
        return sp.csr_matrix(sp.diags(inv) @ self.adjacency)

    def check(self) -> None:
        """Raise :class:`GraphError` if any structural invariant is violated."""
        if self.indptr.shape != (self.n + 1,) or self.indptr[0] != 0:
            raise GraphError("malformed indptr")
        if self.indptr[-1] != self.indices.size:
            raise GraphError("indptr does not match indices length")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.n):
            raise GraphError("neighbor id out of range")
        for i in range(self.n):
            nb = self.neighbors(i)
            if nb.size and np.any(np.diff(nb) <= 0):
                raise GraphError(f"neighbor list of {i} is not strictly increasing")
            if np.any(nb == i):
                raise GraphError(f"self-loop at vertex {i}")
        a = self.adjacency
        if (a != a.T).nnz:
            raise GraphError("adjacency is not symmetric")


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


# --- generators -------------------------------------------------------------


@dataclass(frozen=True)
class SmallWorld:
    n: int
    k: int
    p_rw: float

    def validate(self) -> None:
        if self.k % 2 or self.k <= 0:
            raise GraphError(f"k must be a positive even integer, got {self.k}")
        if self.k >= self.n:
            raise GraphError(f"k must be smaller than n (k={self.k}, n={self.n})")
        if not 0.0 <= self.p_rw <= 1.0:
            raise GraphError(f"p_rw must lie in [0, 1], got {self.p_rw}")


@dataclass(frozen=True)
class DCBM:
    n: int
    n_comm: int
    p_comm: float
    degree_mean: float = 10.0
    degree_variance: float = 40.0

    def validate(self) -> None:
        if self.n < 2:
            raise GraphError("DCBM needs at least 2 vertices")
        if self.n_comm < 1:
            raise GraphError("n_comm must be at least 1")
        if not 0.0 < self.p_comm <= 1.0:
            raise GraphError(f"p_comm must lie in (0, 1], got {self.p_comm}")
        if self.degree_mean <= 0:
            raise GraphError("degree_mean must be positive")
        if self.degree_variance < 0:
            raise GraphError("degree_variance must be non-negative")
        if self.degree_mean > self.n - 1:
            raise GraphError(
                f"expected degree {self.degree_mean} exceeds n - 1 = {self.n - 1}"
            )


GraphGenSpec = SmallWorld | DCBM

_MAX_REWIRE_TRIES = 100


def generate_small_world(spec: SmallWorld, rng: np.random.Generator) -> Graph:
    """Watts-Strogatz ring lattice with independent rewiring of each lattice edge.

    Edges ``(i, i+d)`` are visited for ``d = 1..k/2``; a rewired edge keeps
    ``i`` and draws a new uniform far endpoint, rejecting self-loops and
    duplicates.  After ``_MAX_REWIRE_TRIES`` rejections the edge is kept.
    """
    spec.validate()
    n, half = spec.n, spec.k // 2
    edges: set[tuple[int, int]] = set()
    for d in range(1, half + 1):
        for i in range(n):
            j = (i + d) % n
            edges.add((min(i, j), max(i, j)))
    if spec.p_rw > 0:
        flips = rng.random((half, n)) < spec.p_rw
        for d in range(1, half + 1):
            for i in np.flatnonzero(flips[d - 1]):
                i = int(i)
                j = (i + d) % n
                for _ in range(_MAX_REWIRE_TRIES):
                    w = int(rng.integers(n))
                    e = (min(i, w), max(i, w))
                    if w != i and e not in edges:
                        edges.discard((min(i, j), max(i, j)))
                        edges.add(e)
                        break
    pairs = np.array(sorted(edges), dtype=np.int64)
    return Graph._from_unique_pairs(n, pairs[:, 0], pairs[:, 1])


def lognormal_params(mean: float, variance: float) -> tuple[float, float]:
    """Underlying (mu, sigma) of a log-normal with the given mean and variance."""
    sigma2 = math.log1p(variance / mean**2)
    return math.log(mean) - sigma2 / 2, math.sqrt(sigma2)


def _solve_affinity(weights: np.ndarray, target: float) -> float:
    """Scale ``w`` so that ``sum(min(1, w * weights)) == target``."""
    if target <= 0 or weights.size == 0:
        return 0.0
    if target > weights.size or (target == weights.size and weights.min() <= 0):
        raise GraphError("block affinity target is infeasible for these degrees")
    f = lambda w: np.minimum(1.0, w * weights).sum() - target
    hi = target / weights.sum()
    while f(hi) < 0:
        hi *= 2
    return optimize.brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-12)


def generate_dcbm(
    spec: DCBM, rng: np.random.Generator, return_communities: bool = False
) -> Graph | tuple[Graph, np.ndarray]:
    """Bernoulli degree-corrected blockmodel with two affinity levels.

    Expected degrees come from a rounded log-normal (minimum 1).  Pair
    ``(i, j)`` is joined with probability ``min(1, theta_i theta_j w / 2m)``
    where ``w`` is the within- or between-community affinity, each solved so the
    expected edge counts are ``p_comm * m`` and ``(1 - p_comm) * m``.
    With ``return_communities`` the community labels are returned as well.
    """
    spec.validate()
    n = spec.n
    comm = rng.integers(spec.n_comm, size=n)
    if spec.degree_variance > 0:
        mu, sigma = lognormal_params(spec.degree_mean, spec.degree_variance)
        theta = np.maximum(1.0, np.rint(rng.lognormal(mu, sigma, size=n)))
    else:
        theta = np.full(n, max(1.0, round(spec.degree_mean)))
    if theta.max() > n - 1:
        raise GraphError(f"sampled expected degree {theta.max():.0f} exceeds n - 1")

    two_m = theta.sum()
    m = two_m / 2
    iu, ju = np.triu_indices(n, k=1)
    base = theta[iu] * theta[ju] / two_m
    same = comm[iu] == comm[ju]
    if spec.n_comm == 1 or not np.any(~same):
        w_in, w_out = _solve_affinity(base[same], m), 0.0
    else:
        w_in = _solve_affinity(base[same], spec.p_comm * m)
        w_out = _solve_affinity(base[~same], (1 - spec.p_comm) * m)
    prob = np.minimum(1.0, base * np.where(same, w_in, w_out))
    keep = rng.random(prob.size) < prob
    g = Graph._from_unique_pairs(n, iu[keep].astype(np.int64), ju[keep].astype(np.int64))
    return (g, comm) if return_communities else g


def generate(spec: GraphGenSpec, rng: np.random.Generator) -> Graph:
    if isinstance(spec, SmallWorld):
        return generate_small_world(spec, rng)
    if isinstance(spec, DCBM):
        return generate_dcbm(spec, rng)
    raise TypeError(f"unknown graph spec {spec!r}")


# --- structural utilities ---------------------------------------------------


def bfs_distances(g: Graph, source: int, max_dist: int | None = None) -> dict[int, int]:
    """Hop distances from ``source``, omitting vertices farther than ``max_dist``."""
    if not 0 <= source < g.n:
        raise GraphError(f"source {source} outside [0, {g.n})")
    dist = {source: 0}
    if max_dist is not None and max_dist <= 0:
        return dist
    frontier = deque([source])
    indptr, indices = g.indptr, g.indices
    while frontier:
        u = frontier.popleft()
        du = dist[u] + 1
        for v in indices[indptr[u] : indptr[u + 1]]:
            v = int(v)
            if v not in dist:
                dist[v] = du
                if max_dist is None or du < max_dist:
                    frontier.append(v)
    return dist


def clustering_coefficient(g: Graph) -> float:
    """Average local clustering coefficient; vertices of degree < 2 count as 0."""
    a = g.adjacency
    triangles = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2
    k = g.degrees.astype(np.float64)
    pairs = k * (k - 1) / 2
    local = np.divide(triangles, pairs, out=np.zeros_like(pairs), where=pairs > 0)
    return float(local.mean())


def within_community_fraction(g: Graph, communities: np.ndarray) -> float:
    lo = np.repeat(np.arange(g.n), g.degrees)
    if g.indices.size == 0:
        return float("nan")
    return float(np.mean(communities[lo] == communities[g.indices]))


# --- edge-list files --------------------------------------------------------


def read_edge_list(path: str | Path, n: int | None = None) -> Graph:
    """Read ``u v`` lines (0-based ids).  Blank lines and ``#`` comments are skipped.

    ``n`` defaults to one more than the largest id seen.
    """
    edges: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise GraphError(f"{path}:{lineno}: expected 'u v', got {line.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphError(f"{path}:{lineno}: non-integer vertex id") from None
            if u < 0 or v < 0:
                raise GraphError(f"{path}:{lineno}: negative vertex id")
            if u == v:
                raise GraphError(f"{path}:{lineno}: self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(
                    f"{path}:{lineno}: duplicate edge {key} (first seen on line {seen[key]})"
                )
            seen[key] = lineno
            edges.append(key)
    top = max((v for e in edges for v in e), default=-1) + 1
    if n is None:
        n = max(top, 1)
    elif top > n:
        raise GraphError(f"{path}: vertex id {top - 1} exceeds declared n={n}")
    return Graph.from_edges(n, edges)


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w") as fh:
        for i, j in g.edges():
            fh.write(f"{i} {j}\n")
