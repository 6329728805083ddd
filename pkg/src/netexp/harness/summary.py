"""Bias, variance and RMSE tables from per-replication estimates and truth runs."""

from __future__ import annotations

import numpy as np
import pandas as pd

CELL_FIELDS = ("alpha", "beta", "gamma", "T", "link")
ESTIMATE_FIELDS = ("design", "estimator", "lam")
BASELINE_ESTIMATOR = "diff_in_means"
PLOT_METRICS = ("truth", "bias", "relative_bias", "rmse", "pct_change_rmse", "abs_bias_change")


def summarize_truth(truth: pd.DataFrame, param_name: str) -> pd.DataFrame:
    """Mean global-treatment contrast per configuration with its Monte Carlo standard error."""
    keys = [param_name, *CELL_FIELDS]
    g = truth.groupby(keys, sort=False)["ate"]
    out = g.agg(truth="mean", truth_sd=lambda s: s.std(ddof=1), truth_reps="count").reset_index()
    out["truth_se"] = out["truth_sd"].fillna(0.0) / np.sqrt(out["truth_reps"])
    return out.drop(columns=["truth_sd"])


def _estimate_stats(frame: pd.DataFrame, truth: float) -> pd.Series:
    defined = frame["defined"].astype(bool).to_numpy()
    est = frame["estimate"].to_numpy(dtype=np.float64)[defined]
    n_undefined = int((~defined).sum())
    if est.size == 0:
        return pd.Series({
            "n_reps": len(frame), "n_undefined": n_undefined, "missing": True,
            "mean_estimate": np.nan, "bias": np.nan, "variance": np.nan, "rmse": np.nan,
        })
    mean = est.mean()
    # population variance keeps rmse^2 = bias^2 + variance exact
    return pd.Series({
        "n_reps": len(frame), "n_undefined": n_undefined, "missing": False,
        "mean_estimate": mean, "bias": mean - truth, "variance": est.var(),
        "rmse": float(np.sqrt(np.mean((est - truth) ** 2))),
    })


def summarize(
    per_rep: pd.DataFrame,
    truth: pd.DataFrame,
    param_name: str,
    baseline_design: str | None = None,
) -> pd.DataFrame:
    """One row per (configuration, design, estimator, lambda).

    ``pct_change_rmse`` and ``abs_bias_change`` compare against the
    difference-in-means row of ``baseline_design`` in the same configuration.
    """
    cell_keys = [param_name, *CELL_FIELDS]
    tsum = summarize_truth(truth, param_name)
    merged = per_rep.merge(tsum, on=cell_keys, how="left", validate="many_to_one")
    if merged["truth"].isna().any():
        raise ValueError("some configurations have estimates but no truth runs")
    rows = []
    for key, frame in merged.groupby(cell_keys + list(ESTIMATE_FIELDS), sort=False, dropna=False):
        t = float(frame["truth"].iloc[0])
        stats = _estimate_stats(frame, t)
        rows.append({
            **dict(zip(cell_keys + list(ESTIMATE_FIELDS), key)),
            "truth": t, "truth_se": float(frame["truth_se"].iloc[0]), **stats.to_dict(),
        })
    out = pd.DataFrame(rows)
    out["n_reps"] = out["n_reps"].astype(int)
    out["n_undefined"] = out["n_undefined"].astype(int)
    out["missing"] = out["missing"].astype(bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        out["relative_bias"] = np.where(out["truth"] != 0, out["bias"] / out["truth"], np.nan)

    out["pct_change_rmse"] = np.nan
    out["abs_bias_change"] = np.nan
    if baseline_design is not None:
        base = out[(out["design"] == baseline_design) & (out["estimator"] == BASELINE_ESTIMATOR)]
        base = base[cell_keys + ["rmse", "bias"]].rename(columns={"rmse": "_brmse", "bias": "_bbias"})
        out = out.merge(base, on=cell_keys, how="left")
        with np.errstate(divide="ignore", invalid="ignore"):
            out["pct_change_rmse"] = np.where(
                out["_brmse"] > 0, 100.0 * (out["rmse"] / out["_brmse"] - 1.0), np.nan
            )
        out["abs_bias_change"] = out["bias"].abs() - out["_bbias"].abs()
        out = out.drop(columns=["_brmse", "_bbias"])
    columns = [
        *cell_keys, *ESTIMATE_FIELDS, "truth", "truth_se", "n_reps", "n_undefined", "missing",
        "mean_estimate", "bias", "relative_bias", "variance", "rmse", "pct_change_rmse",
        "abs_bias_change",
    ]
    return out[columns]


def plot_data(summary: pd.DataFrame, param_name: str) -> pd.DataFrame:
    """Long format: one row per (configuration, design, estimator, lambda, metric)."""
    id_cols = [param_name, *CELL_FIELDS, *ESTIMATE_FIELDS]
    long = summary.melt(id_vars=id_cols, value_vars=list(PLOT_METRICS), var_name="metric")
    long["metric"] = pd.Categorical(long["metric"], categories=PLOT_METRICS, ordered=True)
    long["_row"] = long.groupby("metric", observed=True).cumcount()
    long = long.sort_values(["_row", "metric"], kind="stable").drop(columns="_row")
    long["metric"] = long["metric"].astype(str)
    return long.reset_index(drop=True)
