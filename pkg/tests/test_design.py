import itertools
import math

import numpy as np
import pytest

from netexp.clustering import Clustering, singleton_clustering
from netexp.design import (
    Assignment,
    BalancedGraphCluster,
    DesignError,
    GraphCluster,
    HolePunched,
    Independent,
    assignment_log_prob,
    draw_assignment,
    enumerate_support,
    marginal_treatment_prob,
)


def z_distribution(Z, prob):
    out = {}
    for z, p in zip(Z, prob):
        out[tuple(z.tolist())] = out.get(tuple(z.tolist()), 0.0) + p
    return out


def clus(labels):
    return Clustering(np.asarray(labels), max(labels) + 1)


class TestConstruction:
    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_independent_q_open_interval(self, q):
        with pytest.raises(DesignError):
            Independent(q)

    def test_balanced_rejects_odd(self):
        with pytest.raises(DesignError):
            BalancedGraphCluster(clus([0, 1, 2]))

    def test_hole_punched_bounds(self):
        with pytest.raises(DesignError):
            HolePunched(clus([0, 1]), 0.5, 1.2)


class TestDraws:
    def test_cluster_constancy_and_w(self, rng):
        c = clus([0, 0, 1, 1, 1, 2, 3, 3])
        for d in (GraphCluster(c, 0.3), BalancedGraphCluster(c)):
            for _ in range(200):
                a = draw_assignment(d, rng)
                assert np.array_equal(a.z, a.w[c.assignment])
                if isinstance(d, BalancedGraphCluster):
                    assert a.w.sum() == 2

    def test_hole_punched_eta1_equals_cluster(self, rng):
        c = clus([0, 0, 1, 2, 2])
        for _ in range(100):
            a = draw_assignment(HolePunched(c, 0.4, 1.0), rng)
            assert np.array_equal(a.z, a.w[c.assignment])

    def test_hole_punched_q1_treated_fraction(self, rng):
        c = Clustering(np.arange(1000) // 10, 100)
        fr = np.mean([draw_assignment(HolePunched(c, 1.0, 0.9), rng).z.mean() for _ in range(200)])
        assert fr == pytest.approx(0.9, abs=0.005)
        assert marginal_treatment_prob(HolePunched(c, 1.0, 0.9)) == pytest.approx(0.9)

    def test_independent_needs_n(self, rng):
        with pytest.raises(DesignError):
            draw_assignment(Independent(0.5), rng)

    def test_write(self, tmp_path):
        Assignment(np.array([1, 0, 1])).write(tmp_path / "z.txt")
        assert (tmp_path / "z.txt").read_text() == "1\n0\n1\n"


class TestLogProb:
    def test_independent(self):
        assert math.exp(assignment_log_prob(Independent(0.3), Assignment(np.array([1, 0])))) == pytest.approx(0.21)

    def test_balanced_nc2(self):
        d = BalancedGraphCluster(clus([0, 1]))
        for z in ([1, 0], [0, 1]):
            assert math.exp(assignment_log_prob(d, Assignment(np.array(z)))) == pytest.approx(0.5)

    def test_cluster_nc3(self):
        d = GraphCluster(clus([0, 1, 2, 2]), 0.5)
        total = 0.0
        for w in itertools.product([0, 1], repeat=3):
            w = np.array(w)
            p = math.exp(assignment_log_prob(d, Assignment(w[d.clustering.assignment], w)))
            assert p == pytest.approx(1 / 8)
            total += p
        assert total == pytest.approx(1.0, abs=1e-15)

    def test_inconsistent_rejected(self):
        d = GraphCluster(clus([0, 0, 1]), 0.5)
        with pytest.raises(DesignError):
            assignment_log_prob(d, Assignment(np.array([1, 0, 1])))
        with pytest.raises(DesignError):
            assignment_log_prob(BalancedGraphCluster(clus([0, 1])), Assignment(np.array([1, 1])))

    @pytest.mark.parametrize("nc", [1, 2, 5, 8, 12])
    def test_support_sums_to_one(self, nc):
        c = Clustering(np.arange(nc), nc)
        designs = [GraphCluster(c, 0.3)]
        if nc % 2 == 0:
            designs.append(BalancedGraphCluster(c))
        if nc <= 5:
            designs.append(HolePunched(c, 0.3, 0.8))
        for d in designs:
            Z, prob = enumerate_support(d)
            assert prob.sum() == pytest.approx(1.0, abs=1e-12)
            if not isinstance(d, HolePunched):
                logp = [assignment_log_prob(d, Assignment(z)) for z in Z]
                assert np.allclose(np.exp(logp), prob, atol=1e-15)


class TestEnumeration:
    def test_singleton_cluster_matches_independent_n3(self):
        a = z_distribution(*enumerate_support(GraphCluster(singleton_clustering(3), 0.5)))
        b = z_distribution(*enumerate_support(Independent(0.5), 3))
        assert a.keys() == b.keys()
        for k in a:
            assert a[k] == pytest.approx(b[k], abs=1e-15)

    def test_marginals_by_enumeration(self):
        c = clus([0, 0, 1, 2, 2, 3])
        for d in (Independent(0.3), GraphCluster(c, 0.3), BalancedGraphCluster(c), HolePunched(c, 0.3, 0.8)):
            Z, prob = enumerate_support(d, 6)
            assert np.allclose(prob @ Z, marginal_treatment_prob(d), atol=1e-12)

    def test_guard(self):
        with pytest.raises(DesignError):
            enumerate_support(Independent(0.5), 21)

    def test_marginal_monte_carlo(self, rng):
        c = Clustering(np.arange(200) // 4, 50)
        for d in (GraphCluster(c, 0.3), BalancedGraphCluster(c), HolePunched(c, 0.3, 0.8)):
            m = np.mean([draw_assignment(d, rng).z.mean() for _ in range(2000)])
            sd = np.sqrt(0.25 / (2000 * 50))
            assert abs(m - np.mean(marginal_treatment_prob(d))) < 5 * sd
