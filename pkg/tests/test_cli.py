import json
import subprocess
import sys

import pytest

from dimcons.cli import main
from dimcons.config import ExperimentConfig, build_measure
from dimcons.errors import ConfigError
from dimcons.runner import fmt, run_experiment

DRIFT = {"experiment": "drift", "measure": {"variant": "SRW", "rank": 3}, "n": 2000, "trials": 64, "seed": 4}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_config_round_trip():
    cfg = ExperimentConfig.from_dict({**DRIFT, "params": {"method": "mc-plugin"}, "j_max": 9})
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("patch,field", [
    ({"experiment": "nope"}, "experiment"),
    ({"n": 0}, "n"),
    ({"trials": "many"}, "trials"),
    ({"seed": -1}, "seed"),
    ({"j_min": 5, "j_max": 3}, "j_max"),
    ({"bogus": 1}, "bogus"),
    ({"measure": None}, "measure"),
    ({"measure": {"variant": "SRW"}}, "measure"),
    ({"measure": {"rank": 2}}, "measure.variant"),
])
def test_config_errors_name_field(patch, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({**DRIFT, **patch})
    assert info.value.field == field


def test_invalid_json_reports_root():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_json("{not json")
    assert info.value.field == "<root>"


def test_fmt_twelve_digits():
    assert fmt(2 / 3) == "0.666666666667"
    assert fmt(None) == "" and fmt(True) == "true" and fmt(7) == "7"


def test_drift_run_writes_files(tmp_path):
    cfg = ExperimentConfig.from_dict({**DRIFT, "out": str(tmp_path)})
    table = run_experiment(cfg)
    rows = (tmp_path / "drift.csv").read_text().splitlines()
    assert rows[0] == "coordinate,n,trials,estimate,stderr,theoretical,provenance"
    assert rows[1].endswith("0.666666666667,closed-form")
    meta = json.loads((tmp_path / "drift.json").read_text())
    assert meta["config"]["seed"] == 4
    assert "wall_time_seconds" in meta and "numpy" in meta["versions"]
    assert abs(table.summary["estimate"] - 2 / 3) < 0.03


def test_byte_identical_and_thread_independent(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    run_experiment(ExperimentConfig.from_dict({**DRIFT, "out": str(a)}))
    monkeypatch.setenv("DIMCONS_THREADS", "3")
    run_experiment(ExperimentConfig.from_dict({**DRIFT, "out": str(b)}))
    assert (a / "drift.csv").read_bytes() == (b / "drift.csv").read_bytes()


def test_dimension_run_writes_plot_data(tmp_path):
    cfg = ExperimentConfig.from_dict({"experiment": "dimension", "measure": {"variant": "SRW", "rank": 2},
                                      "depth": 16, "out": str(tmp_path), "params": {"samples": 20000}})
    run_experiment(cfg)
    lines = (tmp_path / "dimension_fit.dat").read_text().splitlines()
    assert lines[0].startswith("#")
    x, y = map(float, lines[1].split())
    assert x == -2.0 and y < 0


def test_entropy_and_conditional_runs(tmp_path):
    e = run_experiment(ExperimentConfig.from_dict({"experiment": "entropy", "measure": {"variant": "SRW", "rank": 2},
                                                   "n": 300, "out": str(tmp_path)}))
    assert e.summary["provenance"] == "closed-form"
    c = run_experiment(ExperimentConfig.from_dict({
        "experiment": "conditional-dimension", "out": str(tmp_path), "depth": 12,
        "measure": {"variant": "NoiseMixture", "rho": 0, "base": {"variant": "SRW", "rank": 2}},
        "params": {"samples": 2000, "eta_depth": 128}}))
    assert c.summary["theoretical"] == 0.0


def test_conservation_run_labels_provenance(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "experiment": "conservation", "depth": 14, "out": str(tmp_path),
        "measure": {"variant": "NoiseMixture", "rho": 0, "base": {"variant": "SRW", "rank": 2}},
        "params": {"samples": 20000, "cond_samples": 2000, "cond_depth": 14, "etas": 1}})
    table = run_experiment(cfg)
    assert "residual" in table.summary
    text = (tmp_path / "conservation.csv").read_text()
    assert "dim_joint" in text and "derived" in text


def test_cli_run_with_overrides(tmp_path, capsys):
    p = _write(tmp_path, DRIFT)
    out = tmp_path / "res"
    assert main(["run", "--config", str(p), "--seed", "9", "--trials", "32", "--out", str(out)]) == 0
    meta = json.loads((out / "drift.json").read_text())
    assert meta["config"]["seed"] == 9 and meta["config"]["trials"] == 32
    assert "estimate" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    p = _write(tmp_path, {**DRIFT, "n": -3})
    assert main(["run", "--config", str(p)]) == 2
    assert "field 'n'" in capsys.readouterr().err


def test_cli_module_error_exit_code(tmp_path, capsys):
    cfg = {"experiment": "entropy", "n": 10, "out": str(tmp_path),
           "measure": {"variant": "Table", "rank": 2, "atoms": [[1], [2, 1]], "weights": [0.5, 0.5]}}
    assert main(["run", "--config", str(_write(tmp_path, cfg))]) == 1
    assert "entropy" in capsys.readouterr().err


def test_self_test_fast_passes(capsys):
    assert main(["self-test", "--level", "fast"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "checks passed" in out


def test_fault_injection_is_caught(capsys):
    import dimcons.harmonic as h

    original = h.exact_cylinder_mass
    assert main(["self-test", "--level", "fast", "--inject", "cylinder-exponent"]) == 1
    out = capsys.readouterr().out
    assert "FAIL first-step oracle" in out
    assert h.exact_cylinder_mass is original


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "dimcons.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "self-test" in res.stdout


def test_example_configs_parse():
    from pathlib import Path

    for p in sorted((Path(__file__).parent.parent / "docs" / "configs").glob("*.json")):
        cfg = ExperimentConfig.load(p)
        if cfg.measure:
            build_measure(cfg.measure)
