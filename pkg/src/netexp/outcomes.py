"""Peer-effect outcome dynamics on a fixed graph.

At each step a vertex's latent utility is

    alpha + beta * z_i + gamma * (mean of neighbors' previous outcomes) + noise

and the observed outcome is either the indicator that the utility is positive
(probit threshold, standard normal noise) or the utility itself (identity
link).  Outcomes start at zero.  Isolated vertices get a peer term of zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph
from .seeding import stream

PROBIT = "probit"
IDENTITY = "identity"


@dataclass(frozen=True)
class ResponseModel:
    alpha: float = -1.5
    beta: float = 0.75
    gamma: float = 0.5
    T: int = 3
    link: str = PROBIT
    noise: bool = True

    def __post_init__(self) -> None:
        if int(self.T) < 1:
            raise ValueError(f"T must be at least 1, got {self.T}")
        if self.link not in (PROBIT, IDENTITY):
            raise ValueError(f"link must be {PROBIT!r} or {IDENTITY!r}, got {self.link!r}")
        if self.link == PROBIT and not self.noise:
            raise ValueError("the probit link requires noise")
        for name in ("alpha", "beta", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Outcomes ``y[t, i]`` for ``t = 0..T``; ``latent`` has rows ``t = 1..T`` when kept."""

    y: np.ndarray
    latent: np.ndarray | None = None

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["t", "vertex", "y"])
            for t, row in enumerate(self.y):
                for i, v in enumerate(row):
                    out.writerow([t, i, repr(float(v))])


def draw_noise(m: ResponseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Noise for one replication, shape ``(T, n)``; depends only on the stream."""
    return rng.standard_normal((m.T, n))


def _step(y_prev, z, m, peer, noise_t):
    # y_prev: (..., n); peer @ y for a batch is done on the transposed layout
    social = (peer @ y_prev.T).T if y_prev.ndim > 1 else peer @ y_prev
    latent = m.alpha + m.beta * z + m.gamma * social
    if noise_t is not None:
        latent = latent + noise_t
    if m.link == PROBIT:
        return latent, (latent > 0).astype(np.float64)
    return latent, latent


def simulate(
    g: Graph,
    z,
    m: ResponseModel,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
    keep_latent: bool = False,
) -> Trajectory:
    """Run the dynamics for one assignment.

    Noise comes from ``noise`` (shape ``(T, n)``) when given, else from ``rng``.
    A noiseless identity model ignores both.
    """
    z = np.asarray(getattr(z, "z", z), dtype=np.float64)
    if z.shape != (g.n,):
        raise ValueError(f"assignment has shape {z.shape}, expected ({g.n},)")
    if m.noise:
        if noise is None:
            if rng is None:
                raise ValueError("need rng or noise for a noisy model")
            noise = draw_noise(m, g.n, rng)
        elif noise.shape != (m.T, g.n):
            raise ValueError(f"noise has shape {noise.shape}, expected {(m.T, g.n)}")
    y = np.zeros((m.T + 1, g.n))
    latent = np.zeros((m.T, g.n)) if keep_latent else None
    peer = g.peer_operator
    for t in range(1, m.T + 1):
        lat, y[t] = _step(y[t - 1], z, m, peer, noise[t - 1] if m.noise else None)
        if keep_latent:
            latent[t - 1] = lat
    return Trajectory(y, latent)


def simulate_batch(g: Graph, z, m: ResponseModel, noise: np.ndarray | None) -> np.ndarray:
    """Final outcomes for many noise paths at once.

    ``noise`` has shape ``(R, T, n)``; ``z`` is ``(n,)`` or ``(R, n)``.
    Returns ``(R, n)``.
    """
    z = np.asarray(z, dtype=np.float64)
    if noise is None:
        reps = z.shape[0] if z.ndim == 2 else 1
    else:
        reps = noise.shape[0]
    y = np.zeros((reps, g.n))
    peer = g.peer_operator
    for t in range(m.T):
        _, y = _step(y, z, m, peer, noise[:, t, :] if m.noise else None)
    return y


def true_ate_monte_carlo(
    g: Graph, m: ResponseModel, reps: int, seed: int, cell_key: str = ""
) -> tuple[float, float]:
    """Global-treatment minus global-control mean final outcome, with its MC standard error.

    Replication ``r`` draws its noise from the ``outcome-noise`` stream for
    ``(seed, cell_key, r)`` and uses it for both global runs.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if m.noise:
        noise = np.stack(
            [draw_noise(m, g.n, stream(seed, cell_key, r, "outcome-noise")) for r in range(reps)]
        )
    else:
        noise = None
    ones = np.ones(g.n)
    y1 = simulate_batch(g, ones, m, noise)
    y0 = simulate_batch(g, 0 * ones, m, noise)
    diffs = y1.mean(axis=1) - y0.mean(axis=1)
    if diffs.size == 1 and reps > 1:
        diffs = np.repeat(diffs, reps)
    se = float(diffs.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return float(diffs.mean()), se
