"""
Estimand bias under the linear-in-means model
==============================================

With identity link the expected outcome is ``a + B z`` and every design's
difference-in-means estimand has a closed form.  This compares the relative
bias of independent assignment, cluster randomization and balanced cluster
randomization as the peer effect grows.
"""

import numpy as np

from netexp.clustering import Clustering, epsilon_net_clustering
from netexp.graph import SmallWorld, generate
from netexp.theory import estimand_itr, linear_in_means_model, relative_bias, true_ate_linear

rng = np.random.default_rng(11)
g = generate(SmallWorld(1000, 10, 0.01), rng)
c = epsilon_net_clustering(g, 3, rng)
print(f"3-net clustering: {c.n_clusters} clusters")

# the balanced design needs an even cluster count
if c.n_clusters % 2:
    a = c.assignment.copy()
    a[a == c.n_clusters - 1] = c.n_clusters - 2
    c = Clustering(a, c.n_clusters - 1)

print(f"\n{'gamma':>6} {'ATE':>8} {'independent':>12} {'cluster':>9} {'balanced':>9}")
for gamma in (0.25, 0.5, 0.75, 1.0):
    m = linear_in_means_model(g, alpha=-1.5, beta=0.75, gamma=gamma, t=3)
    tau = true_ate_linear(m)
    ind = estimand_itr(m, "independent") / tau - 1
    print(f"{gamma:>6} {tau:>8.4f} {ind:>12.4f} {relative_bias(m, c):>9.4f} "
          f"{relative_bias(m, c, balanced=True):>9.4f}")
