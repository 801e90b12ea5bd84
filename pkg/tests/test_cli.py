from __future__ import annotations

import json
import subprocess
import sys

import pytest

from wpoincare.cli import FINDING, OK, OPERATIONAL, main


def write(path, obj):
    path.write_text(json.dumps(obj, indent=1) if not isinstance(obj, str) else obj)
    return str(path)


@pytest.fixture
def specs(tmp_path):
    return {
        "r4": write(tmp_path / "r4.json", {"n": 4, "domain": {"kind": "pole_model"}, "eta": {"builtin": "r"},
                                           "fiber": {"V_N": 1.0}}),
        "h3": write(tmp_path / "h3.json", {"n": 3, "domain": {"kind": "pole_model"}, "eta": {"builtin": "sinh"},
                                           "fiber": {"unit_sphere": True}}),
        "r3": write(tmp_path / "r3.json", {"n": 3, "domain": {"kind": "pole_model"}, "eta": {"builtin": "r"},
                                           "fiber": {"unit_sphere": True}}),
        "end2": write(tmp_path / "end2.json", {"A": {"builtin": "r", "params": {"slope": 6.283185307179586}},
                                               "r0": 1.0}),
    }


def run(tmp_path, *argv):
    out = tmp_path / "out"
    return main([*argv, "--output-dir", str(out)]), out


def test_curvature_ok(tmp_path, specs):
    code, out = run(tmp_path, "curvature", "--model", specs["h3"])
    assert code == OK
    data = json.loads((out / "curvature.json").read_text())
    assert data
    assert (out / "curvature.csv").exists()


def test_spectral_verify_pass_and_fail(tmp_path, specs):
    code, _ = run(tmp_path, "spectral", "--model", specs["r3"], "--weight", "hardy")
    assert code == OK
    bad = write(tmp_path / "w.json", {"source": "hardy", "n": 3, "scale": 2.0})
    code, out = run(tmp_path, "spectral", "--model", specs["r3"], "--weight", bad)
    assert code == FINDING
    assert json.loads((out / "spectral.json").read_text())["status"] == "FAIL"


def test_decay_rate(tmp_path, specs):
    code, out = run(tmp_path, "decay", "--model", specs["r4"], "--weight", "hardy", "--horizon", "8")
    assert code == OK
    data = json.loads((out / "decay.json").read_text())
    assert data["rate"] == pytest.approx(-2.0, abs=1e-4)


def test_classify_parabolic(tmp_path, specs):
    code, out = run(tmp_path, "classify", "--end", specs["end2"])
    assert code == OK
    assert json.loads((out / "classify.json").read_text())["status"] == "parabolic"


def test_rho_metric_default_horizon(tmp_path):
    code, out = run(tmp_path, "rho-metric", "--weight", "hardy", "--n", "4", "--r-max", "1000")
    assert code == OK
    assert (out / "rho_metric.csv").exists()


def test_rigidity_ode(tmp_path):
    code, out = run(tmp_path, "rigidity", "ode", "--tau", "constant", "--tau-params", '{"c": 1.0}')
    assert code == OK
    assert (out / "rigidity.json").exists()


@pytest.mark.parametrize("params", ['{"value": 1.0}', "{not json"])
def test_rigidity_ode_bad_params(tmp_path, params, capsys):
    code, _ = run(tmp_path, "rigidity", "ode", "--tau", "constant", "--tau-params", params)
    assert code == OPERATIONAL
    assert capsys.readouterr().err.startswith("error:")


def test_rigidity_ode_zero_crossing(tmp_path):
    code, _ = run(tmp_path, "rigidity", "ode", "--tau", "constant", "--tau-params", '{"c": -30.0}')
    assert code == OPERATIONAL


def test_rigidity_conditions_space_form(tmp_path, specs):
    code, _ = run(tmp_path, "rigidity", "conditions", "--model", specs["h3"])
    assert code == OK


def test_rigidity_needs_model(tmp_path, capsys):
    code, _ = run(tmp_path, "rigidity", "conditions")
    assert code == OPERATIONAL
    assert "needs --model" in capsys.readouterr().err


def test_spec_error_points_at_line(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", '{\n  "n": 4,\n  "domain": {"kind": "torus"},\n  "eta": {"builtin": "r"}\n}\n')
    code, _ = run(tmp_path, "curvature", "--model", bad)
    assert code == OPERATIONAL
    assert f"{bad}:3:" in capsys.readouterr().err


def test_invalid_json_points_at_line(tmp_path, capsys):
    bad = write(tmp_path / "broken.json", '{\n  "n": 4,\n  "eta": {"builtin": "r"\n}\n')
    code, _ = run(tmp_path, "curvature", "--model", bad)
    assert code == OPERATIONAL
    assert f"{bad}:" in capsys.readouterr().err


def test_missing_spec_file(tmp_path):
    code, _ = run(tmp_path, "curvature", "--model", str(tmp_path / "nope.json"))
    assert code == OPERATIONAL


def test_outputs_are_deterministic(tmp_path, specs):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        assert main(["rho-metric", "--weight", "hardy", "--n", "4", "--output-dir", str(d)]) == OK
    for name in ("rho_metric.json", "rho_metric.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "wpoincare", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "rigidity" in res.stdout
