import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from qpcocycle import cli
from qpcocycle.config import JOBS, load_config, parse_config
from qpcocycle.errors import InputError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _rows(path):
    return list(csv.reader(open(path)))


def test_every_job_has_a_sample_config():
    jobs = {load_config(p).job for p in CONFIGS.glob("*.toml")}
    assert jobs == set(JOBS)


def test_unknown_key_rejected():
    with pytest.raises(InputError, match="unknown key 'Kx'"):
        parse_config({"job": "le", "frequency": {"preset": "golden"}, "cocycle": {"kind": "rotation"},
                      "quadrature": {"Kx": 8}})


def test_job_mismatch_rejected():
    with pytest.raises(InputError, match="disagrees"):
        load_config(CONFIGS / "le_rotation.toml", "probe")


@pytest.mark.parametrize("freq", [{}, {"preset": "golden", "coeffs": [1, 2]}, {"preset": "bronze"}])
def test_frequency_section_validation(freq):
    with pytest.raises(InputError):
        parse_config({"job": "classify", "frequency": freq})


def test_overrides(tmp_path):
    cfg = load_config(CONFIGS / "le_rotation.toml", threads=2, grid=512)
    spec = cfg.quadrature()
    assert spec.K == 512 and spec.threads == 2


def test_le_run_outputs(tmp_path):
    assert cli.main(["le", "--config", str(CONFIGS / "le_rotation.toml"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "result.json").read_text())
    assert doc["job"] == "le" and doc["quadrature"]["K"] == 4096
    rows = _rows(tmp_path / "le.csv")
    assert rows[0] == ["N", "K", "L_N", "runtime_ms"]
    assert all(abs(float(r[2])) <= 1e-12 for r in rows[1:])
    plot = _rows(tmp_path / "plot_le.csv")
    assert plot[0] == ["figure", "series", "x", "y"] and len(plot) == 4
    assert _rows(tmp_path / "plot_probe.csv") == [["figure", "series", "x", "y"]]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(man["outputs"]) >= {"result.json", "le.csv", "plot_le.csv"}


def test_infeasible_exit_code(tmp_path, capsys):
    code = cli.main(["probe", "--config", str(CONFIGS / "probe_infeasible.toml"), "--out", str(tmp_path)])
    assert code == 2
    assert "0 < η < 2 − s" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('job = "le"\n[quadrature]\nK = "big"\n')
    assert cli.main(["le", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["le", "--config", str(tmp_path / "missing.toml"), "--out", str(tmp_path / "o")]) == 2


def test_internal_error_exit_code(tmp_path, monkeypatch):
    def boom(cfg, out):
        raise RuntimeError("boom")
    monkeypatch.setitem(cli.JOB_FUNCS, "le", boom)
    assert cli.main(["le", "--config", str(CONFIGS / "le_rotation.toml"), "--out", str(tmp_path)]) == 1


def test_probe_plot_rows_sorted(tmp_path):
    cfg = load_config(CONFIGS / "probe_amo.toml", grid=1024)
    cli.run(cfg, tmp_path)
    rows = _rows(tmp_path / "plot_probe.csv")[1:]
    ext = [r for r in rows if r[1] == "extrapolant"]
    assert len(ext) == 101
    xs = [float(r[2]) for r in ext]
    assert xs == sorted(xs) and xs[0] == -0.5 and xs[50] == 0.0


def test_emit_plot_data_missing_artifact(tmp_path):
    with pytest.raises(InputError, match="missing upstream artifact"):
        cli.emit_plot_data([tmp_path / "nowhere"], tmp_path)


def test_emit_plot_data_merges_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        cli.main(["le", "--config", str(CONFIGS / "le_rotation.toml"), "--out", str(d), "--grid", "256"])
    paths = cli.emit_plot_data([a, b / "result.json"], tmp_path / "merged")
    assert len(_rows(paths["le"])) == 7


@pytest.mark.parametrize("name", ["schedule_golden", "ldt_amo", "classify_golden"])
def test_thread_count_does_not_change_outputs(tmp_path, name):
    outs = []
    for t in (1, 4, 8):
        d = tmp_path / f"t{t}"
        assert cli.main([load_config(CONFIGS / f"{name}.toml").job, "--config", str(CONFIGS / f"{name}.toml"),
                         "--out", str(d), "--threads", str(t), "--grid", "1024"]) == 0
        outs.append({p.name: p.read_bytes() for p in d.iterdir() if p.name != "manifest.json"})
    assert outs[0] == outs[1] == outs[2]


def test_console_script_help():
    exe = shutil.which("qpcocycle")
    cmd = [exe] if exe else [sys.executable, "-m", "qpcocycle.cli"]
    out = subprocess.run(cmd + ["--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for j in JOBS:
        assert j in out.stdout


def test_classify_golden_witness(tmp_path):
    assert cli.main(["classify", "--config", str(CONFIGS / "classify_golden.toml"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "result.json").read_text())
    text = json.dumps(doc)
    assert '"bounded"' in text

    def find(d):
        if isinstance(d, dict):
            if "bounded" in d and isinstance(d["bounded"], dict) and "witness" in d["bounded"]:
                return d["bounded"]["witness"]
            for v in d.values():
                w = find(v)
                if w is not None:
                    return w
        return None
    assert find(doc) == pytest.approx(2.0)


def test_rerun_is_byte_identical(tmp_path):
    cfg = str(CONFIGS / "twoscale_amo.toml")
    for d in ("a", "b"):
        assert cli.main(["twoscale", "--config", cfg, "--out", str(tmp_path / d), "--grid", "1024"]) == 0
    for name in ("result.json", "twoscale.csv", "plot_le.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
