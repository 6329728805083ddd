import math

import numpy as np
import pandas as pd
import pytest

from netexp.harness.summary import plot_data, summarize

KEY = {"p_rw": 0.1, "alpha": -1.5, "beta": 0.75, "gamma": 0.5, "T": 3, "link": "probit"}


def tables(estimates, truths, design="independent(q=0.5)", estimator="diff_in_means", lam=np.nan):
    rep = pd.DataFrame([
        {**KEY, "replication": r, "design": design, "estimator": estimator, "lam": lam,
         "estimate": e, "defined": e is not None}
        for r, e in enumerate(estimates)
    ])
    truth = pd.DataFrame([{**KEY, "replication": r, "y1": t, "y0": 0.0, "ate": t} for r, t in enumerate(truths)])
    return rep, truth


def one_pass(values, truth):
    n = mean = m2 = sq = 0.0
    for x in values:
        n += 1
        delta = x - mean
        mean += delta / n
        m2 += delta * (x - mean)
        sq += (x - truth) ** 2
    return mean - truth, m2 / n, math.sqrt(sq / n)


def test_exact_estimates():
    rep, truth = tables([0.2] * 4, [0.2] * 4)
    row = summarize(rep, truth, "p_rw").iloc[0]
    assert row.bias == 0 and row.rmse == 0 and row.variance == 0


def test_symmetric_spread():
    rep, truth = tables([1.5, -0.5], [0.5, 0.5])
    row = summarize(rep, truth, "p_rw").iloc[0]
    assert row.bias == 0 and row.rmse == 1


def test_one_pass_reference(rng):
    est = rng.normal(0.3, 0.1, 257)
    tr = rng.normal(0.25, 0.01, 257)
    rep, truth = tables(list(est), list(tr))
    row = summarize(rep, truth, "p_rw").iloc[0]
    bias, var, rmse = one_pass(est, tr.mean())
    assert abs(row.bias - bias) <= 1e-12
    assert abs(row.variance - var) <= 1e-12
    assert abs(row.rmse - rmse) <= 1e-12
    assert abs(row.rmse**2 - (row.bias**2 + row.variance)) <= 1e-12
    assert row.truth_se == pytest.approx(tr.std(ddof=1) / np.sqrt(257))


def test_relative_bias_nan_at_zero_truth():
    rep, truth = tables([0.1, -0.3], [0.0, 0.0])
    row = summarize(rep, truth, "p_rw").iloc[0]
    assert np.isnan(row.relative_bias) and row.bias == pytest.approx(-0.1)


def test_missing_cells_and_counts():
    rep, truth = tables([None, None, None], [0.1] * 3)
    row = summarize(rep, truth, "p_rw").iloc[0]
    assert bool(row.missing) and row.n_undefined == 3 and np.isnan(row.rmse)
    rep, truth = tables([0.2, None, 0.4], [0.1] * 3)
    row = summarize(rep, truth, "p_rw").iloc[0]
    assert not row.missing and row.n_undefined == 1 and row.mean_estimate == pytest.approx(0.3)


def test_baseline_columns():
    a, truth = tables([0.0, 0.2], [0.2, 0.2])
    b, _ = tables([0.1, 0.3], [0.2, 0.2], design="cluster(q=0.5)")
    s = summarize(pd.concat([a, b]), truth, "p_rw", baseline_design="independent(q=0.5)")
    base, clus = s.iloc[0], s.iloc[1]
    assert base.pct_change_rmse == 0
    assert clus.pct_change_rmse == pytest.approx(100 * (clus.rmse / base.rmse - 1))
    assert clus.abs_bias_change == pytest.approx(abs(clus.bias) - abs(base.bias))


def test_plot_data_long_format():
    rep, truth = tables([0.1, 0.3], [0.2, 0.2])
    long = plot_data(summarize(rep, truth, "p_rw"), "p_rw")
    assert {"p_rw", "beta", "gamma", "design", "estimator", "metric", "value"} <= set(long.columns)
    assert set(long.metric) == {"truth", "bias", "relative_bias", "rmse", "pct_change_rmse", "abs_bias_change"}
