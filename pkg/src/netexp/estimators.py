"""Difference-in-means, Hajek and Horvitz-Thompson estimators of the ATE.

An estimate is *undefined* (``estimate is None``) when one of the effective
groups is empty; callers decide whether to exclude or re-randomize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exposure import ExposureProbabilities


class ExposureProbabilityError(ValueError):
    """A flagged vertex has zero exposure probability."""


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float | None
    n_treated: int
    n_control: int
    min_weight: float | None = None
    max_weight: float | None = None

    @property
    def defined(self) -> bool:
        return self.estimate is not None


def _flags(ind) -> np.ndarray:
    return np.asarray(ind, dtype=bool)


def exposure_diff_in_means(y, indicators1, indicators0) -> EstimatorResult:
    y = np.asarray(y, dtype=np.float64)
    f1, f0 = _flags(indicators1), _flags(indicators0)
    n1, n0 = int(f1.sum()), int(f0.sum())
    if n1 == 0 or n0 == 0:
        return EstimatorResult(None, n1, n0)
    return EstimatorResult(float(y[f1].mean() - y[f0].mean()), n1, n0)


def diff_in_means(y, z) -> EstimatorResult:
    z = np.asarray(getattr(z, "z", z))
    return exposure_diff_in_means(y, z == 1, z == 0)


def _weights(flags: np.ndarray, pi: np.ndarray) -> np.ndarray:
    p = pi[flags]
    if np.any(p <= 0):
        bad = np.flatnonzero(flags)[p <= 0]
        raise ExposureProbabilityError(
            f"vertices {bad[:10].tolist()} are flagged but have zero exposure probability"
        )
    return 1.0 / p


def _weight_range(*ws: np.ndarray) -> tuple[float | None, float | None]:
    allw = np.concatenate(ws)
    if allw.size == 0:
        return None, None
    return float(allw.min()), float(allw.max())


def hajek(y, indicators1, indicators0, pi: ExposureProbabilities) -> EstimatorResult:
    """Ratio-normalized inverse-probability weighted difference of effective group means."""
    y = np.asarray(y, dtype=np.float64)
    f1, f0 = _flags(indicators1), _flags(indicators0)
    w1, w0 = _weights(f1, pi.pi1), _weights(f0, pi.pi0)
    lo, hi = _weight_range(w1, w0)
    n1, n0 = int(f1.sum()), int(f0.sum())
    if n1 == 0 or n0 == 0:
        return EstimatorResult(None, n1, n0, lo, hi)
    est = np.dot(w1, y[f1]) / w1.sum() - np.dot(w0, y[f0]) / w0.sum()
    return EstimatorResult(float(est), n1, n0, lo, hi)


def horvitz_thompson(
    y, indicators1, indicators0, pi: ExposureProbabilities, n: int | None = None
) -> EstimatorResult:
    """Inverse-probability weighted totals divided by the population size.

    An empty effective group contributes zero, so the estimate is always defined.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size if n is None else int(n)
    f1, f0 = _flags(indicators1), _flags(indicators0)
    w1, w0 = _weights(f1, pi.pi1), _weights(f0, pi.pi0)
    lo, hi = _weight_range(w1, w0)
    est = (np.dot(w1, y[f1]) - np.dot(w0, y[f0])) / n
    return EstimatorResult(float(est), int(f1.sum()), int(f0.sum()), lo, hi)
