import itertools
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from quadclimb.cli import app
from quadclimb.config import load_model
from quadclimb.mapping import load_map

runner = CliRunner()
STANCE_FILE = Path(__file__).resolve().parent.parent / "scenarios" / "stance_vertical.json"


def write_points(path):
    corners = [[0.1 + 0.04 * a, 0.2 + 0.03 * b, 0.015 * c] for a, b, c in itertools.product([-1, 1], repeat=3)]
    path.write_text(json.dumps({"holds": {"h1": corners}}), encoding="utf-8")
    return path


def write_scenario(path, **fields):
    data = {"name": path.stem, "environment": "SkatePayloadVertical", "payload_kg": 3.4, "simulate_execution": False}
    data.update(fields)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_model_dump_and_show(isolated_env):
    result = runner.invoke(app, ["model", "dump", "--configuration", "walking_3dof"])
    assert result.exit_code == 0, result.output
    model = load_model(isolated_env / "model.json")
    assert model.configuration == "walking_3dof"

    result = runner.invoke(app, ["model", "show", "--model", "model.json"])
    assert result.exit_code == 0, result.output
    assert "Robot Model" in result.output
    assert "walking_3dof" in result.output


def test_model_dump_rejects_unknown_configuration(isolated_env):
    result = runner.invoke(app, ["model", "dump", "--configuration", "hexapod"])
    assert result.exit_code != 0
    assert not (isolated_env / "model.json").exists()


def test_invalid_format(isolated_env):
    scenario = write_scenario(isolated_env / "s.json")
    result = runner.invoke(app, ["simulate", str(scenario), "--format", "xml"])
    assert result.exit_code != 0


def test_map_fit_fuse_show(isolated_env):
    points = write_points(isolated_env / "points.json")
    result = runner.invoke(app, ["map", "fit", str(points), "--out", "map.json"])
    assert result.exit_code == 0, result.output
    assert "HOLD MAP" in result.output

    result = runner.invoke(app, ["map", "fuse", "map.json", str(points)])
    assert result.exit_code == 0, result.output
    assert load_map(isolated_env / "map.json").holds["h1"].observations == 2

    result = runner.invoke(app, ["map", "show", "map.json"])
    assert result.exit_code == 0
    assert "h1" in result.output


def test_map_show_missing_file(isolated_env):
    result = runner.invoke(app, ["map", "show", "missing.json"])
    assert result.exit_code == 1
    assert "Could not read map" in result.output


def test_simulate_writes_reports_and_logs(isolated_env):
    scenario = write_scenario(isolated_env / "skate.json", expectations=[{"metric": "feasible", "min": 1}])
    result = runner.invoke(app, ["simulate", str(scenario), "--out", "run", "--format", "csv", "--seed", "3"])
    assert result.exit_code == 0, result.output
    report = json.loads((isolated_env / "run" / "skate.report.json").read_text(encoding="utf-8"))
    assert report["seed"] == 3
    assert report["passed"] is True
    assert (isolated_env / "run" / "skate.plan.csv").exists()
    assert (isolated_env / "run" / "force_tracking.csv").exists()

    result = runner.invoke(app, ["report", "run"])
    assert result.exit_code == 0, result.output
    assert "PERFORMANCE COMPARISON" in result.output
    assert (isolated_env / "run" / "report.md").exists()


def test_simulate_fails_on_missed_expectation(isolated_env):
    scenario = write_scenario(isolated_env / "slow.json", expectations=[{"metric": "speed_m_per_min", "min": 5.0}])
    result = runner.invoke(app, ["simulate", str(scenario), "--out", "run"])
    assert result.exit_code == 1
    assert (isolated_env / "run" / "slow.report.json").exists()


def test_simulate_reports_bad_scenario(isolated_env):
    bad = isolated_env / "bad.json"
    bad.write_text(json.dumps({"name": "bad", "environment": "TrotGround"}), encoding="utf-8")
    result = runner.invoke(app, ["simulate", str(bad)])
    assert result.exit_code == 1
    assert "Simulation failed" in result.output


def test_output_dir_from_environment(isolated_env, monkeypatch):
    monkeypatch.setenv("QUADCLIMB_OUTPUT_DIR", "from_env")
    scenario = write_scenario(isolated_env / "skate.json")
    result = runner.invoke(app, ["simulate", str(scenario)])
    assert result.exit_code == 0, result.output
    assert (isolated_env / "from_env" / "skate.report.json").exists()


def test_report_on_empty_directory(isolated_env):
    (isolated_env / "empty").mkdir()
    result = runner.invoke(app, ["report", "empty"])
    assert result.exit_code == 1
    assert "No reports found" in result.output


@pytest.mark.slow
def test_capacity(isolated_env):
    result = runner.invoke(app, ["capacity", str(STANCE_FILE)])
    assert result.exit_code == 0, result.output
    assert "Max payload" in result.output
    assert "Boosted grip" in result.output
