import copy
import filecmp
import json

import numpy as np
import pandas as pd
import pytest

from netexp.clustering import epsilon_net_clustering
from netexp.design import GraphCluster, draw_assignment
from netexp.graph import generate
from netexp.harness.config import parse_config
from netexp.harness.runner import run_experiment, run_truth
from netexp.seeding import stream
from netexp.theory import linear_in_means_model

SMALL = {
    "graph": {"kind": "small_world", "n": 60, "k": 4, "p_rw": [0.05]},
    "clustering": {"kind": "epsilon_net", "epsilon": 2},
    "designs": [{"kind": "independent", "q": 0.5}, {"kind": "cluster", "q": 0.5}],
    "response": {"alpha": -1.0, "beta": [0.75], "gamma": [0.5], "T": 2},
    "exposure": {"kind": "fntr", "lambda": [0.5, 1.0]},
    "estimators": ["diff_in_means", "exposure_diff_in_means", "hajek", "horvitz_thompson"],
    "replications": 30,
    "seed": 99,
}


def cfg_with(**changes):
    raw = copy.deepcopy(SMALL)
    for k, v in changes.items():
        raw[k] = v
    return parse_config(raw)


def test_null_effect():
    cfg = cfg_with(response={"alpha": -1.0, "beta": 0.0, "gamma": 0.0, "T": 2}, replications=200)
    _, summary = run_experiment(cfg, write=False)
    assert np.all(summary.truth == 0.0)
    for row in summary.itertuples():
        se = np.sqrt(row.variance / (row.n_reps - row.n_undefined))
        assert abs(row.bias) <= 3 * se + 1e-12, row


def test_identity_noiseless_matches_theory_per_replication():
    resp = {"alpha": 0.2, "beta": 0.6, "gamma": 0.5, "T": 3, "link": "identity", "noise": False}
    cfg = cfg_with(response=resp, designs=[{"kind": "cluster", "q": 0.5}], estimators=["diff_in_means"])
    per, _ = run_experiment(cfg, write=False)
    key = cfg.graph.key(0.05)
    for r, est in zip(per.replication, per.estimate):
        g = generate(cfg.graph.spec(0.05), stream(cfg.seed, key, r, "graph"))
        c = epsilon_net_clustering(g, 2, stream(cfg.seed, key, r, "clustering"))
        z = draw_assignment(GraphCluster(c, 0.5), stream(cfg.seed, f"{key}|design=cluster(q=0.5)", r, "assignment")).z
        y = linear_in_means_model(g, 0.2, 0.6, 0.5, 3).mean_outcome(z)
        assert est == pytest.approx(y[z == 1].mean() - y[z == 0].mean(), abs=1e-12)


def test_single_cluster_is_always_undefined():
    cfg = cfg_with(clustering={"kind": "epsilon_net", "epsilon": 60},
                   designs=[{"kind": "cluster", "q": 0.5}], estimators=["diff_in_means"], replications=5)
    _, summary = run_experiment(cfg, write=False)
    row = summary.iloc[0]
    assert row.n_undefined == 5 and bool(row.missing)


def test_rerandomize_reduces_undefined():
    base = dict(designs=[{"kind": "cluster", "q": 0.5}], clustering={"kind": "epsilon_net", "epsilon": 4},
                estimators=["exposure_diff_in_means"], exposure={"kind": "fntr", "lambda": 1.0})
    _, ex = run_experiment(cfg_with(**base), write=False)
    _, rr = run_experiment(cfg_with(**base, undefined_policy="rerandomize"), write=False)
    assert rr.n_undefined.sum() <= ex.n_undefined.sum()
    assert ex.n_undefined.sum() > 0


def test_outputs_and_determinism(tmp_path):
    cfg = cfg_with(replications=45)
    run_experiment(cfg, workers=1, output_dir=tmp_path / "a")
    run_experiment(cfg, workers=2, output_dir=tmp_path / "b")
    for name in ("per_replication.csv", "truth.csv", "summary.csv", "plot_data.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False), name
    meta = json.loads((tmp_path / "a" / "metadata.json").read_text())
    assert meta["base_seed"] == 99 and "Philox" in meta["rng"] and "artifact_version" in meta
    per = pd.read_csv(tmp_path / "a" / "per_replication.csv")
    assert list(per.columns[:6]) == ["p_rw", "alpha", "beta", "gamma", "T", "link"]
    assert per.replication.is_monotonic_increasing


def test_truth_only_matches_full_run():
    cfg = cfg_with(replications=10)
    truth = run_truth(cfg, write=False)
    assert len(truth) == 10
    per, summary = run_experiment(cfg, write=False)
    assert summary.truth.iloc[0] == pytest.approx(truth.ate.mean(), abs=1e-15)


def test_common_random_numbers_pair_designs():
    cfg = cfg_with(graph={"kind": "small_world", "n": 300, "k": 10, "p_rw": 0.01},
                   clustering={"kind": "epsilon_net", "epsilon": 3},
                   response={"alpha": -1.5, "beta": 0.75, "gamma": 0.5, "T": 3},
                   estimators=["diff_in_means"], replications=150)
    per, _ = run_experiment(cfg, write=False)
    wide = per.pivot(index="replication", columns="design", values="estimate")
    a, b = wide["independent(q=0.5)"], wide["cluster(q=0.5)"]
    assert np.var(a - b) < np.var(a) + np.var(b)


def test_dcbm_grid_runs():
    cfg = cfg_with(graph={"kind": "dcbm", "n": 80, "n_comm": 4, "p_comm": [0.3, 0.9], "degree_mean": 5,
                          "degree_variance": 10},
                   response={"alpha": -1.5, "beta": [0.25, 0.75], "gamma": [0.0, 0.5], "T": 2}, replications=4)
    per, summary = run_experiment(cfg, write=False)
    assert set(summary.p_comm) == {0.3, 0.9}
    assert len(summary) == 2 * 4 * 2 * (1 + 3 * 2)
