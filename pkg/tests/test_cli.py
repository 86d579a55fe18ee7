import json

import numpy as np
import pytest

from spacerotor.cli import OUTPUT_DIR_ENV, Scenario, main, read_csv
from spacerotor.errors import ConfigError


def base_config(**overrides):
    cfg = {
        "case": "coincident",
        "params": {"Ibar": [3, 2, 1], "J3": 1},
        "initial": {"Pi": [1, 1, 1], "alpha": 0, "l": 1},
        "dt": 1e-3,
        "steps": 200,
    }
    cfg.update(overrides)
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, cfg, *flags, sub="simulate"):
    out = tmp_path / "out"
    code = main(["--quiet", "--output-dir", str(out), *flags, sub, write(tmp_path, cfg)])
    return code, out


def test_trivial_scenario_is_static(tmp_path):
    cfg = base_config(initial={"Pi": [0, 0, 0], "alpha": 0, "l": 0})
    code, out = run(tmp_path, cfg)
    assert code == 0
    table = read_csv(out / "trajectory.csv")
    for name in ("Pi1", "Pi2", "Pi3", "alpha", "l", "H"):
        assert np.all(table[name] == 0.0)
    report = json.loads((out / "report.json").read_text())
    assert all(c["max_rel_drift"] == 0.0 for c in report["checks"])


def test_reference_scenario(tmp_path):
    code, out = run(tmp_path, base_config(steps=10_000))
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,Pi1,Pi2,Pi3,alpha,l,H,casimir_pi2"
    assert lines[1].split(",")[6].startswith("0.916666666666")
    report = json.loads((out / "report.json").read_text())
    energy = next(c for c in report["checks"] if c["name"] == "energy")
    assert energy["max_rel_drift"] < 1e-10


def test_negative_dt_is_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, base_config(dt=-1))
    assert code == 2
    assert "dt" in capsys.readouterr().err
    with pytest.raises(ConfigError) as info:
        Scenario(base_config(dt=-1))
    assert info.value.field == "dt"


@pytest.mark.parametrize(
    "overrides,field",
    [
        ({"case": "upside-down"}, "case"),
        ({"steps": 0}, "steps"),
        ({"integrator": "euler"}, "integrator"),
        ({"params": {"Ibar": [3, 2], "J3": 1}}, "params.Ibar"),
        ({"control": {"type": "constant"}}, "control.value"),
        ({"tolerances": {"vibes": 1.0}}, "tolerances.vibes"),
        ({"stride": 7}, "stride"),
    ],
)
def test_config_errors_name_the_field(overrides, field):
    with pytest.raises(ConfigError) as info:
        Scenario(base_config(**overrides))
    assert info.value.field == field


def test_stride_row_count_and_uniform_time(tmp_path):
    code, out = run(tmp_path, base_config(steps=200), "--stride", "20")
    assert code == 0
    table = read_csv(out / "trajectory.csv")
    assert len(table["t"]) == 200 // 20 + 1
    steps = np.diff(table["t"])
    assert np.all(steps > 0) and np.allclose(steps, 0.02, rtol=0, atol=1e-15)


def test_noncoincident_full_state_columns(tmp_path):
    cfg = base_config(
        case="noncoincident",
        params={"Ibar": [3, 2, 1], "J3": 1, "gh": 1},
        initial={"Pi": [1, 1, 1], "Gamma": [0, 0.6, 0.8], "alpha": 0, "l": 1},
        integrator="rkmk4",
    )
    code, out = run(tmp_path, cfg)
    assert code == 0
    header = (out / "trajectory.csv").read_text().splitlines()[0].split(",")
    for name in ("Gamma1", "Gamma3", "casimir_pigamma", "casimir_gamma2", "mu1", "a3"):
        assert name in header
    report = json.loads((out / "report.json").read_text())
    names = {c["name"] for c in report["checks"]}
    assert {"gravity_axis_momentum", "advected_vector"} <= names


def test_check_failure_exits_one(tmp_path):
    cfg = base_config(tolerances={"energy": 1e-30}, dt=0.05)
    code, _ = run(tmp_path, cfg)
    assert code == 1


def test_control_fiber_checks(tmp_path):
    for control in ({"type": "constant", "value": 0.3}, {"type": "linear_feedback", "gain": 0.8}):
        code, out = run(tmp_path, base_config(control=control, steps=1000))
        report = json.loads((out / "report.json").read_text())
        fiber = next(c for c in report["checks"] if c["name"] == "control_fiber")
        assert code == 0 and fiber["passed"]


def test_analyze_reproduces_report(tmp_path):
    cfg = base_config(initial={"Pi": [1, -2, 0.5], "A": np.eye(3).tolist(), "alpha": 0.1, "l": 0.4})
    code, out = run(tmp_path, cfg)
    assert code == 0
    first = json.loads((out / "report.json").read_text())
    cfg_path = str(tmp_path / "cfg.json")
    again = main(["--quiet", "--output-dir", str(out), "analyze", cfg_path, str(out / "trajectory.csv")])
    second = json.loads((out / "report.json").read_text())
    first.pop("generated_at"), second.pop("generated_at")
    assert again == 0 and first == second


def test_output_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(target))
    assert main(["--quiet", "simulate", write(tmp_path, base_config(steps=10))]) == 0
    assert (target / "trajectory.csv").exists()


def test_hj_suite_passes_and_is_reproducible(tmp_path):
    cfg = {"points": 100, "type2": {"points": 1, "flow_times": [0.01, 0.05]}}
    reports = []
    for d in ("x", "y"):
        out = tmp_path / d
        assert main(["--quiet", "--seed", "7", "--output-dir", str(out), "hj-suite", write(tmp_path, cfg)]) == 0
        r = json.loads((out / "hj_report.json").read_text())
        r.pop("generated_at")
        reports.append(r)
    assert reports[0] == reports[1]
    checks = {c["name"]: c for c in reports[0]["checks"]}
    assert checks["type1_coincident"]["max_residual"] <= 1e-15
    broken = [r for r in checks["type2_equivalence_coincident"]["records"] if r["map"].startswith("scale")]
    assert broken and all(r["concordant"] and r["lhs_res"] > 1e-4 for r in broken)


def test_hj_suite_empty_battery(tmp_path):
    code, _ = run(tmp_path, {"batteries": []}, sub="hj-suite")
    assert code == 2


def test_missing_config_file(tmp_path):
    assert main(["--quiet", "simulate", str(tmp_path / "nope.json")]) == 2
