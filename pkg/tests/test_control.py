import numpy as np
import pytest

from quadclimb.config import ControlParams
from quadclimb.control import (
    AdmittanceState,
    PlantState,
    admittance_step,
    attenuation,
    execute_plan,
    plateau_rms_error,
    position_step,
    sag_feedforward,
    sag_shift,
    simulate_force_tracking,
    square_wave,
    track_joint_reference,
)
from quadclimb.geometry import GravityFrame
from quadclimb.planners import PhasePlan, plan_skate_cycle

PARAMS = ControlParams()
TICK = 1.0 / PARAMS.command_rate_hz


def test_position_step_clips_to_velocity_limit():
    state = PlantState(q=np.zeros(2))
    command, new = position_step(PARAMS, state, [1.0, -0.001], TICK, [8.0, 8.0])
    assert command[0] == pytest.approx(8.0)
    assert command[1] == pytest.approx(-0.1)
    assert new.q == pytest.approx(command * TICK)


def test_step_settles_without_overshoot():
    trace = track_joint_reference(PARAMS, [0.0], lambda t: [0.5], 1.0, [8.0])
    q = trace["q1"].to_numpy()
    assert q.max() <= 0.5 + 1e-12
    assert abs(q[-1] - 0.5) < 1e-4


def test_commands_are_held_between_ticks():
    trace = track_joint_reference(PARAMS, [0.0], lambda t: [0.2], 0.1, [8.0])
    per_tick = trace.groupby("tick")["cmd1"].nunique()
    assert (per_tick == 1).all()
    assert len(trace) == round(0.1 * PARAMS.command_rate_hz) * PARAMS.plant_substeps


def test_ramp_lag_is_bounded_when_saturated():
    rate, limit = 10.0, 8.0
    trace = track_joint_reference(PARAMS, [0.0], lambda t: [rate * t], 1.0, [limit])
    last = trace.iloc[-1]
    lag = last["ref1"] - last["q1"]
    # Reference is sampled at the last tick; the plant ran one tick past it.
    assert lag >= (rate - limit) * (1.0 - TICK) - limit * TICK
    assert lag <= (rate - limit) * 1.0 + limit * 3 * TICK


def test_admittance_converges_to_static_offset():
    state = AdmittanceState.rest()
    for _ in range(int(30.0 / TICK)):
        state = admittance_step(PARAMS, state, [6.0], TICK)
    assert state.offset[0] == pytest.approx(6.0 / PARAMS.admittance_stiffness_n_per_m, rel=1e-3)
    assert abs(state.velocity[0]) < 1e-6


def test_admittance_rejects_bad_dt():
    with pytest.raises(ValueError):
        admittance_step(PARAMS, AdmittanceState.rest(), [1.0], 0.0)


def test_sag_shift_on_vertical_wall_points_up():
    shift = sag_shift(PARAMS, GravityFrame.vertical())
    assert shift == pytest.approx([0.0, 9.81 * 5e-4, 0.0])


def test_no_sag_compensation_on_the_ground():
    assert np.allclose(sag_shift(PARAMS, GravityFrame.ground()), 0.0)


def test_ceiling_shift_presses_into_surface():
    shift = sag_shift(PARAMS, GravityFrame.ceiling())
    assert shift[2] < 0
    assert shift[:2] == pytest.approx([0.0, 0.0], abs=1e-12)


def test_overhang_shift_exceeds_vertical():
    assert np.linalg.norm(sag_shift(PARAMS, GravityFrame(125.0))) > np.linalg.norm(sag_shift(PARAMS, GravityFrame(90.0)))


def test_feedforward_adds_shift():
    ref = np.array([0.1, 0.2, -0.3])
    assert sag_feedforward(PARAMS, GravityFrame.vertical(), ref) == pytest.approx(ref + sag_shift(PARAMS, GravityFrame.vertical()))


def test_square_wave():
    wave = square_wave(20.0, 5.0, 1.0)
    assert wave(0.1) == 25.0
    assert wave(0.6) == 15.0


@pytest.mark.slow
def test_slow_force_wave_is_tracked():
    trace = simulate_force_tracking(PARAMS, square_wave(20.0, 5.0, 1.0), 6.0)
    assert plateau_rms_error(trace, 1.0, settle_s=2.0) < 0.10
    assert attenuation(trace, settle_s=2.0) < 0.2


@pytest.mark.slow
def test_backlash_attenuates_fast_force_wave():
    with_backlash = simulate_force_tracking(PARAMS, square_wave(20.0, 5.0, 10.0), 3.0)
    without = simulate_force_tracking(PARAMS, square_wave(20.0, 5.0, 10.0), 3.0, backlash_m=0.0)
    assert attenuation(with_backlash, settle_s=1.0) > 0.5
    assert attenuation(without, settle_s=1.0) < 0.5


def test_force_trace_columns():
    trace = simulate_force_tracking(PARAMS, square_wave(20.0, 5.0, 1.0), 0.2)
    assert {"t", "f_ref", "f_meas", "offset_m", "command_m_s"} <= set(trace.columns)
    assert trace["f_meas"].iloc[0] == pytest.approx(25.0, rel=0.05)


@pytest.mark.slow
def test_execution_tracks_skate_plan(climbing_model):
    plan = plan_skate_cycle(climbing_model)
    summary = execute_plan(climbing_model, plan, GravityFrame.vertical())
    assert summary.ik_failures == 0
    assert summary.max_sag_residual_m < 1e-8
    assert summary.max_joint_error_rad < 0.05
    assert {"t", "phase", "joint_error_rad"} <= set(summary.log.columns)


def test_execution_without_feedforward_sags(climbing_model):
    plan = plan_skate_cycle(climbing_model)
    summary = execute_plan(climbing_model, plan, GravityFrame.vertical(), feedforward=False, rate_hz=5.0)
    expected = np.linalg.norm(sag_shift(climbing_model.control, GravityFrame.vertical()))
    assert summary.max_sag_residual_m == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("inclination", [90.0, 125.0, 180.0])
def test_feedforward_cancels_the_sag(climbing_model, inclination):
    plan = plan_skate_cycle(climbing_model)
    gravity = GravityFrame(inclination)
    on = execute_plan(climbing_model, plan, gravity, rate_hz=5.0)
    off = execute_plan(climbing_model, plan, gravity, feedforward=False, rate_hz=5.0)
    assert on.ik_failures == off.ik_failures == 0
    assert on.max_sag_residual_m < 1e-8
    assert off.max_sag_residual_m > 1e-3
    drop = on.log["body_y_actual"] - off.log["body_y_actual"]
    assert np.allclose(drop, sag_shift(climbing_model.control, gravity)[1], atol=1e-8)


def test_empty_plan_executes_trivially(climbing_model):
    summary = execute_plan(climbing_model, PhasePlan((), climbing_model.configuration), GravityFrame.vertical())
    assert summary.log.empty
    assert summary.ik_failures == 0
