import math

import pytest
from pydantic import ValidationError

from quadclimb.config import (
    ConfigurationError,
    FourBarParams,
    GoatParams,
    JointLimits,
    RobotModel,
    default_model,
    load_model,
    load_settings,
    resolve_model,
    save_model,
)


def test_configuration_switches_mass_and_dof():
    climbing = default_model()
    walking = climbing.with_configuration("walking_3dof")
    assert (climbing.mass_kg, climbing.dof_per_limb) == (9.6, 6)
    assert (walking.mass_kg, walking.dof_per_limb) == (6.3, 3)
    assert climbing.body_height_m == pytest.approx(0.35)
    assert walking.body_height_m == pytest.approx(0.34)


def test_four_bar_stroke():
    p = FourBarParams()
    assert p.stroke_m == pytest.approx(0.075)
    assert p.max_angle_rad == pytest.approx(math.asin(0.0375 / 0.06))


def test_half_stroke_must_fit_crank():
    with pytest.raises(ValidationError):
        FourBarParams(max_half_stroke_m=0.07)


def test_joint_limit_shapes():
    with pytest.raises(ValidationError):
        JointLimits(lower_rad=(0.0,) * 5)
    with pytest.raises(ValidationError):
        JointLimits(lower_rad=(1.0,) * 6, upper_rad=(0.0,) * 6)


def test_gripper_openings_ordered():
    with pytest.raises(ValidationError):
        GoatParams(nominal_opening_m=0.2)


def test_model_needs_every_limb():
    model = default_model()
    with pytest.raises(ValidationError):
        RobotModel(limbs=model.limbs[:3])


def test_unknown_limb_raises(climbing_model):
    with pytest.raises(ConfigurationError):
        climbing_model.limb("XX")


def test_model_file_round_trip(tmp_path):
    path = tmp_path / "model.json"
    model = default_model("walking_3dof")
    save_model(model, path)
    assert load_model(path) == model


def test_bad_model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"climbing_mass_kg": -1}', encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_model(path)


def test_settings_from_environment(isolated_env, monkeypatch):
    monkeypatch.setenv("QUADCLIMB_JOBS", "3")
    monkeypatch.setenv("QUADCLIMB_SOLVER", "SCS")
    settings = load_settings()
    assert settings.jobs == 3
    assert settings.solver == "SCS"
    assert settings.association_radius_m == 0.05


def test_settings_read_env_file(isolated_env):
    (isolated_env / ".env").write_text("QUADCLIMB_LOG_LEVEL=DEBUG\n", encoding="utf-8")
    assert load_settings().log_level == "DEBUG"


def test_resolve_model_prefers_explicit_path(isolated_env):
    path = isolated_env / "m.json"
    save_model(default_model().model_copy(update={"climbing_mass_kg": 11.0}), path)
    assert resolve_model(load_settings(), path).mass_kg == 11.0
    assert resolve_model(load_settings()).mass_kg == 9.6
