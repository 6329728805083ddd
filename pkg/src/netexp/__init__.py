"""Randomized experiments on networks with peer effects.

Graph generators, clusterings, assignment designs, outcome dynamics, exposure
conditions, estimators and exact bias oracles.
"""

from .clustering import Clustering, epsilon_net_clustering, singleton_clustering
from .design import (
    Assignment,
    BalancedGraphCluster,
    GraphCluster,
    HolePunched,
    Independent,
    draw_assignment,
)
from .estimators import EstimatorResult, diff_in_means, exposure_diff_in_means, hajek, horvitz_thompson
from .exposure import ExposureProbabilities, ExposureSpec, effective_indicators, exposure_probabilities
from .graph import DCBM, Graph, SmallWorld, generate
from .outcomes import ResponseModel, simulate
from .seeding import derive_seed, stream

__all__ = [
    "Clustering", "epsilon_net_clustering", "singleton_clustering",
    "Assignment", "BalancedGraphCluster", "GraphCluster", "HolePunched", "Independent",
    "draw_assignment",
    "EstimatorResult", "diff_in_means", "exposure_diff_in_means", "hajek", "horvitz_thompson",
    "ExposureProbabilities", "ExposureSpec", "effective_indicators", "exposure_probabilities",
    "DCBM", "Graph", "SmallWorld", "generate",
    "ResponseModel", "simulate",
    "derive_seed", "stream",
]
