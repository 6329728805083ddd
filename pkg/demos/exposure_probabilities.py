"""
Exposure probabilities under two designs
=========================================

How likely is a vertex to have at least three quarters of its neighbors
share its own assignment?  Under independent assignment this collapses with
degree; cluster randomization keeps it high for vertices whose neighbors sit
in their own cluster.
"""

import numpy as np

from netexp import ExposureSpec, GraphCluster, Independent, epsilon_net_clustering, exposure_probabilities
from netexp.graph import DCBM, generate

rng = np.random.default_rng(3)
g = generate(DCBM(1000, 10, 0.8), rng)
c = epsilon_net_clustering(g, 3, rng)
print(f"{g.n} vertices, {g.n_edges} edges, {c.n_clusters} clusters of mean size {c.sizes.mean():.1f}")

spec = ExposureSpec.fntr(0.75)
ind = exposure_probabilities(g, Independent(0.5), spec)
clu = exposure_probabilities(g, GraphCluster(c, 0.5), spec)

# average over vertices grouped by degree
bins = [(1, 3), (4, 7), (8, 12), (13, 20), (21, 10_000)]
print(f"\n{'degree':>10} {'vertices':>9} {'independent':>12} {'cluster':>9}")
for lo, hi in bins:
    mask = (g.degrees >= lo) & (g.degrees <= hi)
    if mask.any():
        print(f"{lo:>4}-{hi:<5} {mask.sum():>9} {ind.pi1[mask].mean():>12.4f} {clu.pi1[mask].mean():>9.4f}")

# a vertex that can never be exposed would leave the weighted estimators undefined
print(f"\nzero-probability vertices: independent {np.sum(ind.pi1 == 0)}, cluster {np.sum(clu.pi1 == 0)}")
