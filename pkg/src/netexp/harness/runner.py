"""Monte Carlo driver: graphs, designs, outcomes and estimates per replication.

Work is split into tasks of consecutive replications for one network setting.
Each replication derives all of its randomness from named streams (see
:mod:`netexp.seeding`), so results do not depend on how tasks are scheduled.
"""

from __future__ import annotations

import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np
import pandas as pd

from .. import estimators as est
from ..clustering import Clustering, epsilon_net_clustering, singleton_clustering
from ..design import (
    BalancedGraphCluster,
    Design,
    GraphCluster,
    HolePunched,
    Independent,
    draw_assignment,
)
from ..exposure import ExposureProbabilities, effective_indicators, exposure_probabilities
from ..graph import Graph, generate
from ..outcomes import draw_noise, simulate_batch
from ..seeding import RNG_NAME, stream
from .config import (
    EXPOSURE_ESTIMATORS,
    WEIGHTED_ESTIMATORS,
    DesignConfig,
    ExperimentConfig,
)
from .summary import plot_data, summarize

log = logging.getLogger(__name__)

WORKERS_ENV = "NETEXP_MAX_WORKERS"
TASK_SIZE = 20

REPLICATION_FILE = "per_replication.csv"
TRUTH_FILE = "truth.csv"
SUMMARY_FILE = "summary.csv"
PLOT_FILE = "plot_data.csv"
METADATA_FILE = "metadata.json"


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else 1
    if workers < 1:
        raise ValueError(f"worker count must be positive, got {workers}")
    return workers


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _make_design(dc: DesignConfig, clustering: Clustering | None) -> Design:
    if dc.kind == "independent":
        return Independent(dc.q)
    if dc.kind == "cluster":
        return GraphCluster(clustering, dc.q)
    if dc.kind == "balanced_cluster":
        return BalancedGraphCluster(clustering)
    return HolePunched(clustering, dc.q, dc.eta)


def _clustering_for(cfg: ExperimentConfig, g: Graph, key: str, r: int) -> Clustering:
    if cfg.clustering.kind == "singleton":
        return singleton_clustering(g.n)
    rc = 0 if cfg.clustering.mode == "fixed" else r
    return epsilon_net_clustering(g, cfg.clustering.epsilon, stream(cfg.seed, key, rc, "clustering"))


def _balanced_ready(c: Clustering) -> Clustering:
    # an odd cluster count cannot be split in half; the last two clusters are merged
    if c.n_clusters % 2 == 0:
        return c
    a = c.assignment.copy()
    a[a == c.n_clusters - 1] = c.n_clusters - 2
    return Clustering(a, c.n_clusters - 1)


@dataclass(frozen=True)
class _Task:
    cfg: ExperimentConfig
    p_index: int
    start: int
    stop: int
    truth_only: bool = False


def _cell_fields(cfg: ExperimentConfig, p: float, cell) -> dict:
    return {
        cfg.graph.param_name: p,
        "alpha": cell.alpha,
        "beta": cell.beta,
        "gamma": cell.gamma,
        "T": cfg.response.T,
        "link": cfg.response.link,
    }


def _all_defined(z: np.ndarray, indicator_sets: list[tuple[np.ndarray, np.ndarray]]) -> bool:
    if not (np.any(z == 1) and np.any(z == 0)):
        return False
    return all(i1.any() and i0.any() for i1, i0 in indicator_sets)


def _run_task(task: _Task) -> tuple[list[dict], list[dict]]:
    cfg = task.cfg
    p = cfg.graph.param_values[task.p_index]
    key = cfg.graph.key(p)
    spec = cfg.graph.spec(p)
    cells = cfg.response.cells()
    models = [cell.model(cfg.response) for cell in cells]
    exposure_specs = cfg.exposure_specs()
    wants_exposure = any(e in EXPOSURE_ESTIMATORS for e in cfg.estimators)
    wants_weights = any(e in WEIGHTED_ESTIMATORS for e in cfg.estimators)
    needs_clustering = (
        any(d.needs_clustering for d in cfg.designs) or cfg.exposure_kind == "cluster_fntr"
    )

    rep_rows: list[dict] = []
    truth_rows: list[dict] = []
    for r in range(task.start, task.stop):
        g = generate(spec, stream(cfg.seed, key, 0 if cfg.graph.mode == "fixed" else r, "graph"))
        clustering = _clustering_for(cfg, g, key, r) if needs_clustering else None
        noise = draw_noise(models[0], g.n, stream(cfg.seed, key, r, "outcome-noise"))

        if r < cfg.truth_replications:
            truth_noise = (
                noise
                if cfg.common_random_numbers
                else draw_noise(models[0], g.n, stream(cfg.seed, key, r, "truth"))
            )
            tn = truth_noise[None] if cfg.response.noise else None
            for cell, m in zip(cells, models):
                y1 = simulate_batch(g, np.ones(g.n), m, tn)[0].mean()
                y0 = simulate_batch(g, np.zeros(g.n), m, tn)[0].mean()
                truth_rows.append(
                    {**_cell_fields(cfg, p, cell), "replication": r,
                     "y1": float(y1), "y0": float(y0), "ate": float(y1 - y0)}
                )
        if task.truth_only or r >= cfg.replications:
            continue

        for dc in cfg.designs:
            c = clustering
            if dc.kind == "balanced_cluster":
                c = _balanced_ready(clustering)
            design = _make_design(dc, c)
            rng = stream(cfg.seed, f"{key}|design={dc.label}", r, "assignment")
            tries = cfg.max_rerandomize if cfg.undefined_policy == "rerandomize" else 1
            for _ in range(tries):
                z = draw_assignment(design, rng, g.n).z
                indicator_sets = (
                    [
                        (effective_indicators(s, g, clustering, z, 1),
                         effective_indicators(s, g, clustering, z, 0))
                        for s in exposure_specs
                    ]
                    if wants_exposure
                    else []
                )
                if _all_defined(z, indicator_sets):
                    break
            pis: list[ExposureProbabilities | None] = [
                exposure_probabilities(g, design, s) if wants_weights else None
                for s in exposure_specs
            ]
            if cfg.common_random_numbers:
                design_noise = noise
            else:
                design_noise = draw_noise(
                    models[0], g.n, stream(cfg.seed, f"{key}|design={dc.label}", r, "outcome-noise")
                )
            dn = design_noise[None] if cfg.response.noise else None

            for cell, m in zip(cells, models):
                y = simulate_batch(g, z, m, dn)[0]
                base = {**_cell_fields(cfg, p, cell), "replication": r, "design": dc.label}
                for name in cfg.estimators:
                    if name == "diff_in_means":
                        res = est.diff_in_means(y, z)
                        rep_rows.append(_row(base, name, None, res))
                        continue
                    for s, (i1, i0), pi in zip(exposure_specs, indicator_sets, pis):
                        if name == "exposure_diff_in_means":
                            res = est.exposure_diff_in_means(y, i1, i0)
                        elif name == "hajek":
                            res = est.hajek(y, i1, i0, pi)
                        else:
                            res = est.horvitz_thompson(y, i1, i0, pi, g.n)
                        rep_rows.append(_row(base, name, s.lam, res))
    return rep_rows, truth_rows


def _row(base: dict, name: str, lam: float | None, res: est.EstimatorResult) -> dict:
    return {
        **base,
        "estimator": name,
        "lam": np.nan if lam is None else float(lam),
        "estimate": res.estimate if res.defined else None,
        "defined": res.defined,
    }


def _tasks(cfg: ExperimentConfig, truth_only: bool) -> list[_Task]:
    total = cfg.truth_replications if truth_only else max(cfg.replications, cfg.truth_replications)
    return [
        _Task(cfg, pi, start, min(start + TASK_SIZE, total), truth_only)
        for pi in range(len(cfg.graph.param_values))
        for start in range(0, total, TASK_SIZE)
    ]


def _execute(tasks: list[_Task], workers: int) -> tuple[list[dict], list[dict]]:
    if workers == 1 or len(tasks) == 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    rep_rows = [row for rows, _ in results for row in rows]
    truth_rows = [row for _, rows in results for row in rows]
    return rep_rows, truth_rows


def _canonical(df: pd.DataFrame, cfg: ExperimentConfig, with_design: bool) -> pd.DataFrame:
    if df.empty:
        return df
    order = {
        cfg.graph.param_name: {v: i for i, v in enumerate(cfg.graph.param_values)},
        "alpha": {v: i for i, v in enumerate(cfg.response.alpha)},
        "beta": {v: i for i, v in enumerate(cfg.response.beta)},
        "gamma": {v: i for i, v in enumerate(cfg.response.gamma)},
    }
    if with_design:
        order["design"] = {d.label: i for i, d in enumerate(cfg.designs)}
        order["estimator"] = {e: i for i, e in enumerate(cfg.estimators)}
    keys = list(order)
    sort_cols = []
    for col in keys:
        df[f"_{col}"] = df[col].map(order[col])
        sort_cols.append(f"_{col}")
    sort_cols.insert(4, "replication")
    if with_design:
        df["_lam"] = df["lam"].astype(float).fillna(-1.0)
        sort_cols.append("_lam")
    df = df.sort_values(sort_cols, kind="stable").drop(columns=[c for c in sort_cols if c.startswith("_")])
    return df.reset_index(drop=True)


def _metadata(cfg: ExperimentConfig, workers: int) -> dict:
    return {
        "artifact_version": _version(),
        "base_seed": cfg.seed,
        "rng": RNG_NAME,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "workers": workers,
        "replications": cfg.replications,
        "truth_replications": cfg.truth_replications,
        "config": cfg.raw,
    }


def write_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, lineterminator="\n")


def run_experiment(
    cfg: ExperimentConfig, workers: int | None = None, output_dir: str | Path | None = None,
    write: bool = True,
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Run every configuration cell; returns ``(per_replication, summary)``.

    With ``write`` the tables, truth runs, plot data and run metadata are saved
    under ``output_dir`` (default: the configured output directory).
    """
    workers = resolve_workers(workers)
    log.info("running %d replications over %d network settings with %d worker(s)",
             cfg.replications, len(cfg.graph.param_values), workers)
    rep_rows, truth_rows = _execute(_tasks(cfg, truth_only=False), workers)
    per_rep = _canonical(pd.DataFrame(rep_rows), cfg, with_design=True)
    truth = _canonical(pd.DataFrame(truth_rows), cfg, with_design=False)
    summary = summarize(per_rep, truth, cfg.graph.param_name, baseline_design=cfg.baseline_design)
    if write:
        out = Path(output_dir or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(per_rep, out / REPLICATION_FILE)
        write_csv(truth, out / TRUTH_FILE)
        write_csv(summary, out / SUMMARY_FILE)
        write_csv(plot_data(summary, cfg.graph.param_name), out / PLOT_FILE)
        meta = _metadata(cfg, workers)
        meta["param_name"] = cfg.graph.param_name
        meta["baseline_design"] = cfg.baseline_design
        (out / METADATA_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True, default=str))
    return per_rep, summary


def run_truth(
    cfg: ExperimentConfig, workers: int | None = None, output_dir: str | Path | None = None,
    write: bool = True,
) -> pd.DataFrame:
    """Global-treatment and global-control runs only; returns per-replication truth rows."""
    workers = resolve_workers(workers)
    _, truth_rows = _execute(_tasks(cfg, truth_only=True), workers)
    truth = _canonical(pd.DataFrame(truth_rows), cfg, with_design=False)
    if write:
        out = Path(output_dir or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(truth, out / TRUTH_FILE)
    return truth


def report(results_dir: str | Path) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Recompute summary and plot data from saved per-replication and truth tables."""
    d = Path(results_dir)
    meta = json.loads((d / METADATA_FILE).read_text())
    per_rep = pd.read_csv(d / REPLICATION_FILE, float_precision="round_trip")
    truth = pd.read_csv(d / TRUTH_FILE, float_precision="round_trip")
    summary = summarize(per_rep, truth, meta["param_name"], baseline_design=meta.get("baseline_design"))
    plots = plot_data(summary, meta["param_name"])
    write_csv(summary, d / SUMMARY_FILE)
    write_csv(plots, d / PLOT_FILE)
    return summary, plots
