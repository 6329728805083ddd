"""Closed-form and enumeration oracles for estimand bias.

For a linear outcome model ``E[Y(z)] = a + B z`` the true ATE and the
design-specific difference-in-means estimands have closed forms.  For anything
else (other exposure conditions, nonlinear outcomes) the estimands are
computed by enumerating every outcome of a small design.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .clustering import Clustering
from .design import Design, Independent, enumerate_support, MAX_ENUMERATION
from .exposure import ExposureSpec, effective_indicators
from .graph import Graph
from .outcomes import ResponseModel, simulate_batch


@dataclass(frozen=True, eq=False)
class LinearOutcomeModel:
    a: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64)
        B = np.asarray(self.B, dtype=np.float64)
        if B.shape != (a.size, a.size):
            raise ValueError(f"B has shape {B.shape}, expected {(a.size, a.size)}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return int(self.a.size)

    def mean_outcome(self, z) -> np.ndarray:
        """``a + B z`` for a single assignment or a stack of them (rows)."""
        z = np.asarray(z, dtype=np.float64)
        return self.a + z @ self.B.T


def linear_in_means_model(
    g: Graph, alpha: float, beta: float, gamma: float, t: int, ey0=None
) -> LinearOutcomeModel:
    """Expected outcome after ``t`` steps of the identity-link dynamics as ``a + B z``.

    ``B = beta * S`` and ``a = alpha * S 1 + P^t E[Y_0]`` with
    ``S = sum_{q<t} P^q`` and ``P = gamma D^-1 A``.  The sum is accumulated
    term by term, so ``gamma = 1`` needs no special case.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    P = gamma * g.peer_operator
    term = sp.identity(g.n, format="csr")
    S = term.toarray()
    for _ in range(1, t):
        term = P @ term
        S += term.toarray()
    a = alpha * S.sum(axis=1)
    if ey0 is not None:
        y0 = np.asarray(ey0, dtype=np.float64)
        for _ in range(t):
            y0 = P @ y0
        a = a + y0
    return LinearOutcomeModel(a, beta * S)


def true_ate_linear(m: LinearOutcomeModel) -> float:
    return float(m.B.sum() / m.n)


def _same_cluster(c: Clustering) -> np.ndarray:
    a = c.assignment
    return a[:, None] == a[None, :]


def _require_clustering(c: Clustering | None, n: int) -> Clustering:
    if c is None:
        raise ValueError("this design needs a clustering")
    if c.n != n:
        raise ValueError(f"clustering covers {c.n} vertices, model has {n}")
    return c


def estimand_itr(
    m: LinearOutcomeModel, design_kind: str, clustering: Clustering | None = None
) -> float:
    """Difference-in-means estimand under the linear model.

    ``design_kind`` is one of ``independent``, ``cluster``, ``balanced_cluster``
    or ``balanced_independent``.  The balanced cluster value is for the given
    fixed clustering and needs equal cluster sizes and an even cluster count.
    """
    n, B = m.n, m.B
    if design_kind == "independent":
        return float(np.trace(B) / n)
    if design_kind == "cluster":
        c = _require_clustering(clustering, n)
        return float(B[_same_cluster(c)].sum() / n)
    if design_kind == "balanced_cluster":
        c = _require_clustering(clustering, n)
        nc = c.n_clusters
        if nc % 2 or nc < 2:
            raise ValueError(f"balanced design needs an even cluster count >= 2, got {nc}")
        if np.unique(c.sizes).size != 1:
            raise ValueError("balanced formula needs equal cluster sizes")
        same = _same_cluster(c)
        return float((B[same].sum() - B[~same].sum() / (nc - 1)) / n)
    if design_kind == "balanced_independent":
        if n % 2:
            raise ValueError("balanced independent assignment needs an even vertex count")
        diag = np.trace(B)
        return float((diag - (B.sum() - diag) / (n - 1)) / n)
    raise ValueError(f"unknown design kind {design_kind!r}")


def estimand_itr_balanced_random_clustering(m: LinearOutcomeModel, n_clusters: int) -> float:
    """Balanced-cluster estimand averaged over a uniformly random equal-size clustering.

    Uses the exact co-membership probability ``(N / N_C - 1) / (N - 1)``.
    """
    n, B = m.n, m.B
    if n % n_clusters or n_clusters % 2:
        raise ValueError("need an even cluster count dividing n")
    p_same = (n / n_clusters - 1) / (n - 1)
    factor = p_same - (1 - p_same) / (n_clusters - 1)
    diag = np.trace(B)
    return float((diag + (B.sum() - diag) * factor) / n)


def relative_bias(m: LinearOutcomeModel, clustering: Clustering, balanced: bool = False) -> float:
    """Relative bias of the cluster (or balanced cluster) difference-in-means estimand."""
    total = m.B.sum()
    if total == 0:
        raise ZeroDivisionError("relative bias is undefined when the true ATE is zero")
    c = _require_clustering(clustering, m.n)
    ratio = m.B[_same_cluster(c)].sum() / total
    if not balanced:
        return float(ratio - 1)
    if c.n_clusters < 2:
        raise ValueError("balanced design needs at least 2 clusters")
    return float((1 + 1 / (c.n_clusters - 1)) * (ratio - 1))


@dataclass(frozen=True, eq=False)
class EnumeratedEstimand:
    """Exact design expectations for one side.

    ``conditional_means[i] = E[Y_i | effective side]``, ``contributions[i]`` is
    that minus ``Y_i`` under global ``side``, and ``exposure_probs[i]`` is the
    probability of the conditioning event.  Vertices that can never be exposed
    carry NaN.
    """

    mu: float
    contributions: np.ndarray
    conditional_means: np.ndarray
    exposure_probs: np.ndarray


def _outcomes_for(Z: np.ndarray, fn: Callable, vectorized: bool) -> np.ndarray:
    if vectorized:
        return np.asarray(fn(Z), dtype=np.float64)
    return np.array([fn(z) for z in Z], dtype=np.float64)


def estimand_brute_force(
    g: Graph,
    d: Design,
    spec: ExposureSpec,
    mean_outcome_fn: Callable,
    side: int,
    clustering: Clustering | None = None,
    vectorized: bool = False,
    max_outcomes: int = MAX_ENUMERATION,
) -> EnumeratedEstimand:
    """``mu^d_g(side)`` by exhaustive enumeration of the design.

    ``mean_outcome_fn(z)`` returns the per-vertex expected outcomes under
    assignment ``z``; with ``vectorized=True`` it receives the whole stack of
    assignments (one per row) at once.
    """
    c = clustering if clustering is not None else getattr(d, "clustering", None)
    Z, prob = enumerate_support(d, g.n, max_outcomes=max_outcomes)
    Y = _outcomes_for(Z, mean_outcome_fn, vectorized)
    ind = effective_indicators(spec, g, c, Z, side)
    p_exposed = prob @ ind
    weighted = prob @ (ind * Y)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(p_exposed > 0, weighted / p_exposed, np.nan)
    y_global = np.asarray(mean_outcome_fn(np.full((1, g.n) if vectorized else g.n, side)))
    y_global = y_global.reshape(-1)
    contrib = cond - y_global
    return EnumeratedEstimand(float(np.mean(cond)), contrib, cond, p_exposed)


def estimand_tau_brute_force(
    g: Graph, d: Design, spec: ExposureSpec, mean_outcome_fn: Callable, **kw
) -> float:
    return (
        estimand_brute_force(g, d, spec, mean_outcome_fn, 1, **kw).mu
        - estimand_brute_force(g, d, spec, mean_outcome_fn, 0, **kw).mu
    )


def estimator_expectation(
    g: Graph,
    d: Design,
    mean_outcome_fn: Callable,
    estimator: Callable[[np.ndarray, np.ndarray], object],
    vectorized: bool = False,
    max_outcomes: int = MAX_ENUMERATION,
) -> tuple[float, float]:
    """Design expectation of an estimator that is linear in the outcomes given ``z``.

    ``estimator(y, z)`` returns an :class:`~netexp.estimators.EstimatorResult`.
    Returns ``(E[estimate | defined], P(defined))``.
    """
    Z, prob = enumerate_support(d, g.n, max_outcomes=max_outcomes)
    Y = _outcomes_for(Z, mean_outcome_fn, vectorized)
    total = 0.0
    p_def = 0.0
    for z, y, p in zip(Z, Y, prob):
        res = estimator(y, z)
        if res.defined:
            total += p * res.estimate
            p_def += p
    return (total / p_def if p_def > 0 else float("nan")), p_def


@dataclass(frozen=True)
class BiasEstimate:
    spec: ExposureSpec
    bias: float
    se: float


def exposure_bias_monte_carlo(
    g: Graph,
    specs: list[ExposureSpec],
    model: ResponseModel,
    n_draws: int,
    rng: np.random.Generator,
    q: float = 0.5,
    chunk: int = 25_000,
) -> list[BiasEstimate]:
    """Estimand bias ``tau^ind_g - tau`` for several exposure conditions.

    Expectations over the independent design are exact (every assignment is
    enumerated); expectations over outcome noise use ``n_draws`` paths shared
    by all assignments, so the biases of different conditions are computed on
    common random numbers.  Standard errors are across noise paths.
    """
    d = Independent(q)
    Z, prob = enumerate_support(d, g.n)
    n, k = g.n, len(specs)
    # weights[z, i, s]: contribution of Y_i under assignment z to bias of spec s
    weights = np.zeros((len(prob), n, k))
    for s, spec in enumerate(specs):
        for side, sign in ((1, 1.0), (0, -1.0)):
            ind = effective_indicators(spec, g, None, Z, side).astype(np.float64)
            p_exp = prob @ ind
            if np.any(p_exp <= 0):
                raise ValueError(f"{spec.label}: some vertex can never be exposed")
            weights[:, :, s] += sign * prob[:, None] * ind / (p_exp * n)
    is_one = np.all(Z == 1, axis=1)
    is_zero = np.all(Z == 0, axis=1)
    weights[is_one] -= 1.0 / n
    weights[is_zero] += 1.0 / n

    per_draw = []
    for start in range(0, n_draws, chunk):
        m = min(chunk, n_draws - start)
        noise = rng.standard_normal((m, model.T, n)) if model.noise else None
        acc = np.zeros((m, k))
        for zi, z in enumerate(Z):
            acc += simulate_batch(g, np.broadcast_to(z, (m, n)), model, noise) @ weights[zi]
        per_draw.append(acc)
    b = np.concatenate(per_draw)
    if b.shape[0] > 1:
        se = b.std(axis=0, ddof=1) / np.sqrt(b.shape[0])
    else:
        se = np.zeros(k)
    return [BiasEstimate(spec, float(b[:, s].mean()), float(se[s])) for s, spec in enumerate(specs)]
