import csv
import json
from pathlib import Path

import pytest

from quenchtopo.cli import main, parse_model
from quenchtopo.coldatom import ColdAtomSpec
from quenchtopo.errors import ConfigError
from quenchtopo.models import Family

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def test_parse_model_strings():
    spec = parse_model("qwz:m=1,n=3")
    assert spec.family is Family.QWZ1D and spec.t_s == 2 and spec.t_so == 1 and spec.n == 3
    assert parse_model({"family": "ssh", "t1": 0.5}).t1 == 0.5
    assert isinstance(parse_model("atom:delta=2"), ColdAtomSpec)
    for bad in ("qwz:m=1,n=1.5", "qwz:q=1", "foo:m=1", "qwz:m", "m=1"):
        with pytest.raises(ConfigError):
            parse_model(bad)


def test_model_trivial_qwz(tmp_path):
    assert run(tmp_path, "model", "--spec", "qwz:m=5,n=1") == 0
    summary = json.loads((tmp_path / "model.json").read_text())
    assert summary["analytic_winding"] == summary["numerical_winding"] == 0
    assert summary["omega_range"] == pytest.approx([2, 18], abs=1e-12)
    assert header(tmp_path / "model.csv") == ["k", "E_plus", "E_minus", "angle"]


def test_model_ssh(tmp_path):
    assert run(tmp_path, "model", "--spec", "ssh:t1=0,t2=1,n=1") == 0
    assert json.loads((tmp_path / "model.json").read_text())["numerical_winding"] == 1


def test_model_critical_point(tmp_path, capsys):
    assert run(tmp_path, "model", "--spec", "qwz:m=4,t_s=2") == 2
    assert "CriticalPoint" in capsys.readouterr().err


@pytest.mark.parametrize("initial,final,count", [
    ("qwz:m=5,n=2", "qwz:m=5,n=1", 0),
    ("qwz:m=1,n=3", "qwz:m=5,n=1", 3),
    ("qwz:m=1,n=2", "qwz:m=1,n=2", 0),
])
def test_quench_counts(tmp_path, initial, final, count):
    assert run(tmp_path, "quench", "--initial", initial, "--final", final) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["exact_count"] == report["peak_count"] == count
    assert header(tmp_path / "overlap.csv") == ["k", "c_plus_sq", "c_minus_sq", "delta_angle"]


def test_quench_plane_mismatch(tmp_path, capsys):
    assert run(tmp_path, "quench", "--initial", "qwz:m=1", "--final", "ssh:t1=0.5") == 1
    assert "Pauli" in capsys.readouterr().err


def test_quench_disagreement_exit(tmp_path):
    # default thresholds count the near-1 false peaks of this pair
    code = run(tmp_path, "quench", "--initial", "qwz:m=1,n=4,t_so=0.1",
               "--final", "qwz:m=1,n=2,t_so=0.1")
    report = json.loads((tmp_path / "report.json").read_text())
    assert code == 2 and report["agreement"] is False
    assert run(tmp_path, "quench", "--initial", "qwz:m=1,n=4,t_so=0.1",
               "--final", "qwz:m=1,n=2,t_so=0.1", "--eps-hi", "1e-4") == 0


def test_emission_outputs(tmp_path):
    assert run(tmp_path, "emission", "--initial", "qwz:m=1,n=3", "--final", "qwz:m=5,n=1",
               "--bins", "256") == 0
    summary = json.loads((tmp_path / "emission.json").read_text())
    assert summary["n_initial_omega"] == summary["n_initial_k"] == 3
    assert summary["omega_range"] == [2.0, 18.0]
    assert header(tmp_path / "emission.csv") == ["omega", "I", "c_plus_4"]
    with open(tmp_path / "emission.csv") as fh:
        assert sum(1 for _ in fh) == 257


def test_emission_multi_minimum(tmp_path):
    assert run(tmp_path, "emission", "--initial", "qwz:m=1,n=3", "--final", "qwz:m=1,n=2") == 2


def test_coldatom_outputs(tmp_path):
    assert run(tmp_path, "coldatom", "--initial", "qwz:m=1,n=3", "--final", "qwz:m=5,n=1",
               "--grid-n", "1024", "--shots", "1000", "--seed", "5") == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["inferred_initial_candidates"] == [3] and report["correct"]
    assert header(tmp_path / "densities.csv") == ["q", "n_up", "n_down", "shots"]


def test_coldatom_reads_measured_densities(tmp_path):
    assert run(tmp_path / "a", "coldatom", "--initial", "qwz:m=1,n=2", "--final",
               "qwz:m=5,n=1", "--grid-n", "1024") == 0
    assert run(tmp_path / "b", "coldatom", "--final", "qwz:m=5,n=1",
               "--densities", str(tmp_path / "a" / "densities.csv")) == 0
    report = json.loads((tmp_path / "b" / "report.json").read_text())
    assert report["inferred_initial_candidates"] == [2]


def test_sweep_default_grid(tmp_path):
    assert run(tmp_path, "sweep") == 0
    with open(tmp_path / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) >= 150 and all(r["agree"] == "true" for r in rows)
    assert list(rows[0]) == ["m1", "n1", "m2", "n2", "t_so", "expected", "exact_count",
                             "peak_count", "agree"]


def test_sweep_false_cps(tmp_path):
    assert run(tmp_path, "sweep", "--t-so", "0.1", "--flag-false-cps", "--eps-hi", "1e-4") == 0
    with open(tmp_path / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert any(int(r["false_cps"]) > 0 for r in rows)
    assert all(r["exact_count"] == r["expected"] for r in rows)


def test_sweep_empty_grid(tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text(json.dumps({"n": []}))
    assert run(tmp_path, "sweep", "--config", str(cfg)) == 1


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"initial": "qwz:m=1,n=3", "final": "qwz:m=5,n=1",
                               "grid_n": 2048}))
    assert run(tmp_path, "quench", "--config", str(cfg), "--grid-n", "1024") == 0
    assert json.loads((tmp_path / "report.json").read_text())["grid_n"] == 1024


def test_bad_inputs(tmp_path):
    assert run(tmp_path, "quench", "--final", "qwz:m=5") == 1
    assert run(tmp_path, "model", "--spec", "qwz:m=1", "--grid-n", "10") == 1
    assert run(tmp_path, "model", "--config", str(tmp_path / "missing.json")) == 3
    assert main(["nosuchcommand"]) == 1


@pytest.mark.parametrize("config,command", [
    ("quench_cases_tso1.json", "quench"), ("quench_cases_ssh.json", "quench"),
    ("quench_cases_tso01.json", "quench"), ("emission_to_trivial.json", "emission"),
    ("model_final_bands.json", "model"),
])
def test_shipped_configs_run(tmp_path, config, command):
    assert main([command, "--config", str(CONFIGS / config), "--out", str(tmp_path)]) == 0
    assert any(tmp_path.rglob("*.png"))


def test_plots_are_byte_identical(tmp_path):
    for fmt in ("png", "svg", "pdf"):
        outs = []
        for name in ("a", "b"):
            assert run(tmp_path / name, "quench", "--initial", "qwz:m=1,n=3", "--final",
                       "qwz:m=5,n=1", "--grid-n", "512", "--plot", "--plot-format", fmt) == 0
            outs.append((tmp_path / name / f"overlap.{fmt}").read_bytes())
        assert outs[0] == outs[1]
