import subprocess
import sys

import yaml

from netexp.harness.cli import main

CFG = {
    "graph": {"kind": "small_world", "n": 40, "k": 4, "p_rw": 0.1},
    "designs": [{"kind": "independent"}, {"kind": "cluster"}],
    "clustering": {"epsilon": 2},
    "replications": 4,
    "seed": 5,
    "output": {"dir": "results"},
}


def write_cfg(tmp_path, cfg=CFG):
    p = tmp_path / "cfg.yaml"
    p.write_text(yaml.safe_dump(cfg))
    return p


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", str(write_cfg(tmp_path))]) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_validate_error(tmp_path, capsys):
    assert main(["validate", str(write_cfg(tmp_path, {**CFG, "colour": 1}))]) == 2
    assert "unknown top-level" in capsys.readouterr().err


def test_run_truth_report(tmp_path):
    p = write_cfg(tmp_path)
    assert main(["run", str(p)]) == 0
    out = tmp_path / "results"
    assert (out / "summary.csv").exists() and (out / "metadata.json").exists()
    before = (out / "summary.csv").read_text()
    (out / "summary.csv").unlink()
    assert main(["report", str(out)]) == 0
    assert (out / "summary.csv").read_text() == before
    assert main(["truth", str(p), "--output", str(tmp_path / "t")]) == 0
    assert (tmp_path / "t" / "truth.csv").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "netexp", "validate", str(write_cfg(tmp_path))],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
