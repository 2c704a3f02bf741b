"""
Tests for the command-line surface
"""
import json

import pytest

from pursuit_sim.main import main
from tests.conftest import pair_document


def _summary(capsys):
    return json.loads(capsys.readouterr().out)


def test_run_writes_trace_and_summary(tmp_path, capsys):
    """Test run on a bundled scenario"""
    assert main(["--log-level", "WARNING", "run", "fig1", "--out", str(tmp_path)]) == 0
    summary = _summary(capsys)
    assert summary["command"] == "run"
    assert summary["scenario"] == "fig1"
    assert (tmp_path / "trace.csv").exists()
    assert json.loads((tmp_path / "summary.json").read_text())["steps"] == summary["steps"]


def test_run_step_override(tmp_path, capsys):
    """Test --dt reaches the integration block"""
    assert main(["--log-level", "WARNING", "run", "fig1", "--dt", "0.01", "--out", str(tmp_path)]) == 0
    assert _summary(capsys)["dt"] == 0.01


def test_run_invalid_scenario_exits_1(tmp_path, capsys):
    """Test a schema violation maps to exit code 1 and names the key"""
    document = pair_document()
    document["agents"][1]["params"]["c"] = 1.2
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(document))
    assert main(["--log-level", "WARNING", "run", str(path), "--out", str(tmp_path)]) == 1
    summary = _summary(capsys)
    assert summary["key"] == "agents.1.params.c"
    assert summary["exit_code"] == 1


def test_run_missing_scenario_exits_1(tmp_path, capsys):
    """Test an unknown scenario name"""
    assert main(["--log-level", "WARNING", "run", str(tmp_path / "nope.json")]) == 1


def test_verify_theorem1(tmp_path, capsys):
    """Test the capture-condition report for the bundled inputs"""
    assert main(["--log-level", "WARNING", "verify", "theorem1", "remark1", "--out", str(tmp_path)]) == 0
    report = _summary(capsys)["report"]
    assert report["eps1_bound"] == pytest.approx(1.31652, abs=1e-5)
    assert report["cond_v"] is True
    assert (tmp_path / "theorem1.json").exists()


def test_verify_theorem1_rejects_scenarios(tmp_path, capsys):
    """Test a simulation scenario is not accepted as checker inputs"""
    assert main(["--log-level", "WARNING", "verify", "theorem1", "fig1", "--out", str(tmp_path)]) == 1


def test_verify_theorem2(tmp_path, capsys):
    """Test the reduced ODE check from the bundled inputs outside the desired circle"""
    argv = ["--log-level", "WARNING", "verify", "theorem2", "theorem2", "--out", str(tmp_path)]
    assert main(argv) == 0
    report = _summary(capsys)["report"]
    assert report["q0"] == [3.0, 4.0]
    assert report["final_error"] < 1e-3
    assert report["lyapunov_monotone"] is True
    assert (tmp_path / "theorem2.json").exists()


def test_verify_theorem2_reads_inputs_file_and_overrides(tmp_path, capsys):
    """Test a user inputs file inside the circle, with a flag overriding its clearance"""
    inputs = tmp_path / "inside.json"
    inputs.write_text(json.dumps({"metadata": {"name": "inside"}, "theorem2": {"q0": [0.1, 0.0], "d_des": 1.0}}))
    argv = ["--log-level", "WARNING", "verify", "theorem2", str(inputs), "--d-des", "2.0", "--out", str(tmp_path)]
    assert main(argv) == 0
    report = _summary(capsys)["report"]
    assert report["q0"] == [0.1, 0.0]
    assert report["d_des"] == 2.0
    assert report["final_error"] < 1e-3


def test_verify_theorem2_rejects_other_files(tmp_path, capsys):
    """Test scenarios and capture-condition inputs are refused with the expected key"""
    for name in ("fig1", "remark1"):
        assert main(["--log-level", "WARNING", "verify", "theorem2", name, "--out", str(tmp_path)]) == 1
        assert _summary(capsys)["key"] == "theorem2"


def test_sweep_and_show_sweep(tmp_path, capsys):
    """Test a small sweep file is written and summarized"""
    document = pair_document(sweep={"axes": [{"path": "layout.d0", "values": [0.5, 6.0]}]})
    document["integration"] = {"dt": 0.01, "t_f": 1.0}
    scenario = tmp_path / "small.json"
    scenario.write_text(json.dumps(document))

    assert main(["--log-level", "WARNING", "sweep", str(scenario), "--out", str(tmp_path), "--jobs", "1"]) == 0
    swept = _summary(capsys)
    assert swept["results"][0]["cells"] == 2

    assert main(["--log-level", "WARNING", "show-sweep", str(tmp_path / "sweep.csv")]) == 0
    shown = _summary(capsys)
    assert shown["axes"] == ["layout.d0"]
    assert shown["capture_rate"] == swept["results"][0]["capture_rate"]


def test_sweep_with_unknown_axis_path_exits_1(tmp_path, capsys):
    """Test a sweep over a path the scenario lacks is a config error before any cell runs"""
    document = pair_document(sweep={"axes": [{"path": "engagement.eps3", "values": [0.5]}]})
    scenario = tmp_path / "typo.json"
    scenario.write_text(json.dumps(document))
    assert main(["--log-level", "WARNING", "sweep", str(scenario), "--out", str(tmp_path), "--jobs", "1"]) == 1
    assert _summary(capsys)["key"] == "engagement.eps3"
    assert not (tmp_path / "sweep.csv").exists()


def test_sweep_without_block_exits_1(tmp_path, capsys):
    """Test sweeping a scenario that has no sweep block"""
    assert main(["--log-level", "WARNING", "sweep", "fig1", "--out", str(tmp_path)]) == 1
    assert _summary(capsys)["key"] == "sweep"


def test_unknown_command_is_usage_error():
    """Test argparse rejects unknown commands"""
    with pytest.raises(SystemExit) as excinfo:
        main(["teleport"])
    assert excinfo.value.code == 2
