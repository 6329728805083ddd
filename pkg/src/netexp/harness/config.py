"""Experiment configuration: YAML loading and strict validation.

Every section is a mapping with a fixed key set; unknown keys are errors so a
typo never silently falls back to a default.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from ..design import MAX_ENUMERATION
from ..exposure import CLUSTER_FNTR, FNTR, ExposureSpec
from ..graph import DCBM, GraphError, SmallWorld
from ..outcomes import IDENTITY, PROBIT, ResponseModel

ESTIMATORS = ("diff_in_means", "exposure_diff_in_means", "hajek", "horvitz_thompson")
EXPOSURE_ESTIMATORS = ESTIMATORS[1:]
WEIGHTED_ESTIMATORS = ("hajek", "horvitz_thompson")
DESIGN_KINDS = ("independent", "cluster", "balanced_cluster", "hole_punched")
POLICIES = ("exclude", "rerandomize")


class ConfigError(ValueError):
    pass


def _as_list(value, name: str) -> list:
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError(f"{name} must not be empty")
    return values


def _finite(values: list, name: str) -> list[float]:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{name} entries must be finite numbers, got {v!r}")
        out.append(float(v))
    return out


def _section(raw: Any, name: str, allowed: set[str], required: set[str] = frozenset()) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {sorted(unknown)}")
    missing = required - set(raw)
    if missing:
        raise ConfigError(f"missing key(s) in {name}: {sorted(missing)}")
    return raw


@dataclass(frozen=True)
class GraphConfig:
    kind: str
    n: int
    k: int = 10
    p_rw: tuple[float, ...] = (0.01,)
    n_comm: int = 10
    p_comm: tuple[float, ...] = (0.8,)
    degree_mean: float = 10.0
    degree_variance: float = 40.0
    mode: str = "regenerate"

    @property
    def param_name(self) -> str:
        return "p_rw" if self.kind == "small_world" else "p_comm"

    @property
    def param_values(self) -> tuple[float, ...]:
        return self.p_rw if self.kind == "small_world" else self.p_comm

    def spec(self, p: float) -> SmallWorld | DCBM:
        if self.kind == "small_world":
            return SmallWorld(self.n, self.k, p)
        return DCBM(self.n, self.n_comm, p, self.degree_mean, self.degree_variance)

    def key(self, p: float) -> str:
        if self.kind == "small_world":
            return f"small_world|n={self.n}|k={self.k}|p_rw={p!r}"
        return (
            f"dcbm|n={self.n}|n_comm={self.n_comm}|p_comm={p!r}"
            f"|mean={self.degree_mean!r}|var={self.degree_variance!r}"
        )


@dataclass(frozen=True)
class ClusteringConfig:
    kind: str = "epsilon_net"
    epsilon: int = 3
    mode: str = "recluster"


@dataclass(frozen=True)
class DesignConfig:
    kind: str
    q: float = 0.5
    eta: float = 0.95

    @property
    def label(self) -> str:
        if self.kind == "independent":
            return f"independent(q={self.q:g})"
        if self.kind == "cluster":
            return f"cluster(q={self.q:g})"
        if self.kind == "balanced_cluster":
            return "balanced_cluster"
        return f"hole_punched(q={self.q:g},eta={self.eta:g})"

    @property
    def needs_clustering(self) -> bool:
        return self.kind != "independent"


@dataclass(frozen=True)
class ResponseCell:
    alpha: float
    beta: float
    gamma: float

    def model(self, resp: "ResponseConfig") -> ResponseModel:
        return ResponseModel(self.alpha, self.beta, self.gamma, resp.T, resp.link, resp.noise)


@dataclass(frozen=True)
class ResponseConfig:
    alpha: tuple[float, ...] = (-1.5,)
    beta: tuple[float, ...] = (0.75,)
    gamma: tuple[float, ...] = (0.5,)
    T: int = 3
    link: str = PROBIT
    noise: bool = True

    def cells(self) -> list[ResponseCell]:
        return [ResponseCell(a, b, g) for a, b, g in itertools.product(self.alpha, self.beta, self.gamma)]


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphConfig
    clustering: ClusteringConfig
    designs: tuple[DesignConfig, ...]
    response: ResponseConfig
    exposure_kind: str
    lambdas: tuple[float, ...]
    estimators: tuple[str, ...]
    replications: int
    truth_replications: int
    seed: int
    undefined_policy: str = "exclude"
    max_rerandomize: int = 100
    common_random_numbers: bool = True
    output_dir: str = "results"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def exposure_specs(self) -> list[ExposureSpec]:
        return [ExposureSpec(self.exposure_kind, lam) for lam in self.lambdas]

    @property
    def baseline_design(self) -> str | None:
        for d in self.designs:
            if d.kind == "independent":
                return d.label
        return None


_TOP_KEYS = {
    "graph", "clustering", "designs", "response", "exposure", "estimators",
    "replications", "truth_replications", "seed", "undefined_policy",
    "max_rerandomize", "common_random_numbers", "output",
}


def _int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def _parse_graph(raw) -> GraphConfig:
    sec = _section(
        raw, "graph",
        {"kind", "n", "k", "p_rw", "n_comm", "p_comm", "degree_mean", "degree_variance", "mode"},
        {"kind", "n"},
    )
    kind = sec["kind"]
    if kind not in ("small_world", "dcbm"):
        raise ConfigError(f"graph.kind must be small_world or dcbm, got {kind!r}")
    foreign = {"n_comm", "p_comm", "degree_mean", "degree_variance"} if kind == "small_world" else {"k", "p_rw"}
    if foreign & set(sec):
        raise ConfigError(f"keys {sorted(foreign & set(sec))} do not apply to graph.kind={kind}")
    mode = sec.get("mode", "regenerate")
    if mode not in ("regenerate", "fixed"):
        raise ConfigError("graph.mode must be regenerate or fixed")
    cfg = GraphConfig(
        kind=kind,
        n=_int(sec["n"], "graph.n", 1),
        k=_int(sec.get("k", 10), "graph.k", 1),
        p_rw=tuple(_finite(_as_list(sec.get("p_rw", 0.01), "graph.p_rw"), "graph.p_rw")),
        n_comm=_int(sec.get("n_comm", 10), "graph.n_comm", 1),
        p_comm=tuple(_finite(_as_list(sec.get("p_comm", 0.8), "graph.p_comm"), "graph.p_comm")),
        degree_mean=_finite([sec.get("degree_mean", 10.0)], "graph.degree_mean")[0],
        degree_variance=_finite([sec.get("degree_variance", 40.0)], "graph.degree_variance")[0],
        mode=mode,
    )
    for p in cfg.param_values:
        try:
            cfg.spec(p).validate()
        except GraphError as exc:
            raise ConfigError(f"graph: {exc}") from None
    return cfg


def _parse_designs(raw) -> tuple[DesignConfig, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("designs must be a non-empty list")
    out = []
    for i, item in enumerate(raw):
        sec = _section(item, f"designs[{i}]", {"kind", "q", "eta"}, {"kind"})
        kind = sec["kind"]
        if kind not in DESIGN_KINDS:
            raise ConfigError(f"designs[{i}].kind must be one of {DESIGN_KINDS}, got {kind!r}")
        if kind == "balanced_cluster" and "q" in sec:
            raise ConfigError("balanced_cluster treats half the clusters; q does not apply")
        if kind != "hole_punched" and "eta" in sec:
            raise ConfigError(f"eta only applies to hole_punched designs (designs[{i}])")
        q = _finite([sec.get("q", 0.5)], f"designs[{i}].q")[0]
        eta = _finite([sec.get("eta", 0.95)], f"designs[{i}].eta")[0]
        lo_ok = 0 <= q <= 1 if kind == "hole_punched" else 0 < q < 1
        if not lo_ok or not 0 <= eta <= 1:
            raise ConfigError(f"designs[{i}]: probabilities out of range")
        out.append(DesignConfig(kind, q, eta))
    labels = [d.label for d in out]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate designs: {labels}")
    return tuple(out)


def _parse_response(raw) -> ResponseConfig:
    sec = _section(raw, "response", {"alpha", "beta", "gamma", "T", "link", "noise"})
    link = sec.get("link", PROBIT)
    if link not in (PROBIT, IDENTITY):
        raise ConfigError(f"response.link must be {PROBIT} or {IDENTITY}")
    noise = sec.get("noise", True)
    if not isinstance(noise, bool):
        raise ConfigError("response.noise must be true or false")
    if link == PROBIT and not noise:
        raise ConfigError("the probit link requires noise")
    return ResponseConfig(
        alpha=tuple(_finite(_as_list(sec.get("alpha", -1.5), "alpha"), "response.alpha")),
        beta=tuple(_finite(_as_list(sec.get("beta", 0.75), "beta"), "response.beta")),
        gamma=tuple(_finite(_as_list(sec.get("gamma", 0.5), "gamma"), "response.gamma")),
        T=_int(sec.get("T", 3), "response.T", 1),
        link=link,
        noise=noise,
    )


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    for key in ("graph", "designs", "replications", "seed"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    graph = _parse_graph(raw["graph"])
    csec = _section(raw.get("clustering"), "clustering", {"kind", "epsilon", "mode"})
    clustering = ClusteringConfig(
        kind=csec.get("kind", "epsilon_net"),
        epsilon=_int(csec.get("epsilon", 3), "clustering.epsilon", 1),
        mode=csec.get("mode", "recluster"),
    )
    if clustering.kind not in ("epsilon_net", "singleton"):
        raise ConfigError("clustering.kind must be epsilon_net or singleton")
    if clustering.mode not in ("recluster", "fixed"):
        raise ConfigError("clustering.mode must be recluster or fixed")
    if clustering.mode == "fixed" and graph.mode != "fixed":
        raise ConfigError("a fixed clustering needs a fixed graph (graph.mode: fixed)")

    designs = _parse_designs(raw["designs"])
    response = _parse_response(raw.get("response"))

    esec = _section(raw.get("exposure"), "exposure", {"kind", "lambda"})
    exposure_kind = esec.get("kind", FNTR)
    if exposure_kind not in (FNTR, CLUSTER_FNTR):
        raise ConfigError(f"exposure.kind must be {FNTR} or {CLUSTER_FNTR}")
    lambdas = tuple(_finite(_as_list(esec.get("lambda", 0.75), "exposure.lambda"), "exposure.lambda"))
    if any(not 0 <= lam <= 1 for lam in lambdas):
        raise ConfigError("exposure.lambda entries must lie in [0, 1]")

    estimators = tuple(_as_list(raw.get("estimators", ["diff_in_means"]), "estimators"))
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise ConfigError(f"unknown estimator(s) {bad}; expected {ESTIMATORS}")
    if len(set(estimators)) != len(estimators):
        raise ConfigError("duplicate estimators")

    if any(e in WEIGHTED_ESTIMATORS for e in estimators):
        for d in designs:
            if d.kind in ("balanced_cluster", "hole_punched"):
                bits = graph.n if d.kind == "balanced_cluster" else 2 * graph.n
                if 2**bits > MAX_ENUMERATION:
                    raise ConfigError(
                        f"weighted estimators under {d.label} need exposure probabilities by "
                        f"enumeration, infeasible for n={graph.n}"
                    )
        if exposure_kind == CLUSTER_FNTR and any(d.kind == "independent" for d in designs):
            raise ConfigError("cluster-level exposure probabilities need a cluster design")

    replications = _int(raw["replications"], "replications", 1)
    truth_reps = _int(raw.get("truth_replications", replications), "truth_replications", 1)
    policy = raw.get("undefined_policy", "exclude")
    if policy not in POLICIES:
        raise ConfigError(f"undefined_policy must be one of {POLICIES}")
    crn = raw.get("common_random_numbers", True)
    if not isinstance(crn, bool):
        raise ConfigError("common_random_numbers must be true or false")
    osec = _section(raw.get("output"), "output", {"dir"})

    return ExperimentConfig(
        graph=graph,
        clustering=clustering,
        designs=designs,
        response=response,
        exposure_kind=exposure_kind,
        lambdas=lambdas,
        estimators=estimators,
        replications=replications,
        truth_replications=truth_reps,
        seed=_int(raw["seed"], "seed", 0),
        undefined_policy=policy,
        max_rerandomize=_int(raw.get("max_rerandomize", 100), "max_rerandomize", 1),
        common_random_numbers=crn,
        output_dir=str(osec.get("dir", "results")),
        raw=raw,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    cfg = parse_config(raw)
    out = Path(cfg.output_dir)
    if not out.is_absolute():
        cfg = replace(cfg, output_dir=str(Path(path).resolve().parent / out))
    return cfg
