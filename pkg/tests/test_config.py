import copy

import pytest

from netexp.harness.config import ConfigError, load_config, parse_config

BASE = {
    "graph": {"kind": "small_world", "n": 40, "k": 4, "p_rw": [0.0, 0.1]},
    "clustering": {"kind": "epsilon_net", "epsilon": 2},
    "designs": [{"kind": "independent", "q": 0.5}, {"kind": "cluster", "q": 0.5}],
    "response": {"alpha": -1.5, "beta": [0.0, 0.75], "gamma": [0.5], "T": 2},
    "exposure": {"kind": "fntr", "lambda": [0.5, 1.0]},
    "estimators": ["diff_in_means", "hajek"],
    "replications": 3,
    "seed": 1,
}


def with_change(path, value):
    raw = copy.deepcopy(BASE)
    node = raw
    for key in path[:-1]:
        node = node[key]
    if value is KeyError:
        del node[path[-1]]
    else:
        node[path[-1]] = value
    return raw


def test_parses_base():
    cfg = parse_config(copy.deepcopy(BASE))
    assert cfg.graph.param_values == (0.0, 0.1)
    assert len(cfg.response.cells()) == 2
    assert [s.lam for s in cfg.exposure_specs()] == [0.5, 1.0]
    assert cfg.baseline_design == "independent(q=0.5)"
    assert cfg.truth_replications == 3


@pytest.mark.parametrize(
    "path,value",
    [
        (("bogus",), 1),
        (("graph", "colour"), "red"),
        (("graph", "k"), 5),
        (("graph", "n_comm"), 3),
        (("designs",), []),
        (("designs",), [{"kind": "independent", "q": 1.0}]),
        (("designs",), [{"kind": "balanced_cluster", "q": 0.5}]),
        (("designs",), [{"kind": "independent"}, {"kind": "independent"}]),
        (("response", "T"), 0),
        (("response", "beta"), [float("nan")]),
        (("response", "link"), "logit"),
        (("exposure", "lambda"), [1.5]),
        (("estimators",), ["median"]),
        (("replications",), 0),
        (("seed",), KeyError),
        (("undefined_policy",), "ignore"),
        (("graph", "mode"), "sometimes"),
    ],
)
def test_rejects(path, value):
    with pytest.raises(ConfigError):
        parse_config(with_change(path, value))


def test_weighted_under_balanced_needs_small_graph():
    raw = with_change(("designs",), [{"kind": "balanced_cluster"}])
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_fixed_clustering_needs_fixed_graph():
    with pytest.raises(ConfigError):
        parse_config(with_change(("clustering", "mode"), "fixed"))


def test_load_resolves_output_dir(tmp_path):
    p = tmp_path / "cfg.yaml"
    p.write_text("graph: {kind: dcbm, n: 60, n_comm: 3, p_comm: 0.5}\n"
                 "designs: [{kind: independent}]\nreplications: 2\nseed: 3\noutput: {dir: out}\n")
    cfg = load_config(p)
    assert cfg.output_dir == str(tmp_path / "out")
    assert cfg.graph.param_name == "p_comm"


def test_load_reports_yaml_errors(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("graph: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(p)
