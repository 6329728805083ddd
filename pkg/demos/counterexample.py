"""
When a stricter exposure condition hurts
=========================================

Vertex 0 has no neighbors in its own cluster.  Its neighbors form one cluster
of ten and two singleton clusters, and its outcome is 1 only when it and the
last singleton neighbor (vertex 12) are both treated.  Under cluster
randomization, asking for three matching neighbors instead of two moves the
conditional mean further from the global-treatment value.  Counting whole
clusters instead restores the ordering.
"""

import numpy as np

from netexp import Clustering, ExposureSpec, GraphCluster, Graph
from netexp.theory import estimand_brute_force

g = Graph.from_edges(13, [(0, j) for j in range(1, 13)])
c = Clustering(np.array([0] + [1] * 10 + [2, 3]), 4)
design = GraphCluster(c, 0.5)


def outcome(Z):
    y = np.zeros(Z.shape[:-1] + (13,))
    y[..., 0] = Z[..., 0] * Z[..., 12]
    return y


def conditional_mean(spec):
    return estimand_brute_force(g, design, spec, outcome, side=1, vectorized=True).conditional_means[0]


print("global treatment gives Y_0 = 1\n")
print("neighbors counted one by one")
for need in (2, 3):
    print(f"  at least {need} of 12 match: E[Y_0 | exposed] = {conditional_mean(ExposureSpec.fntr(need / 12)):.4f}")
print("neighbor clusters counted whole")
for need in (2, 3):
    print(f"  at least {need} of 3 match:  E[Y_0 | exposed] = {conditional_mean(ExposureSpec.cluster_fntr(need / 3)):.4f}")
