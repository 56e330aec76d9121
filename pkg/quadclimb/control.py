"""Simulated execution: rate-capped joint position loops, admittance force
tracking against a compliant contact with backlash, and sag feedforward.

Commands are recomputed only on command-rate ticks and held in between;
the plant integrates ``plant_substeps`` times per tick.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config import LIMB_IDS, ControlParams, RobotModel
from .geometry import CLIMB_AXIS, WALL_NORMAL, GravityFrame
from .kinematics import KinematicsError, limb_fk, shoulder_frames
from .planners.base import PhasePlan, solve_limb

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlantState:
    """Joint positions and velocities, toe contact wrench and backlash offsets."""

    q: np.ndarray
    qd: np.ndarray = field(default_factory=lambda: np.zeros(0))
    wrench: np.ndarray = field(default_factory=lambda: np.zeros(6))
    backlash_offset: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if self.qd.size != q.size:
            object.__setattr__(self, "qd", np.zeros_like(q))
        if self.backlash_offset.size != q.size:
            object.__setattr__(self, "backlash_offset", np.zeros_like(q))


@dataclass(frozen=True)
class AdmittanceState:
    offset: np.ndarray
    velocity: np.ndarray

    @classmethod
    def rest(cls, axes: int = 1) -> "AdmittanceState":
        return cls(np.zeros(axes), np.zeros(axes))


def position_step(
    params: ControlParams,
    state: PlantState,
    reference: Sequence[float],
    dt: float,
    velocity_limits: Sequence[float],
) -> Tuple[np.ndarray, PlantState]:
    """Proportional velocity command, clipped, applied for ``dt``."""
    limits = np.broadcast_to(np.asarray(velocity_limits, dtype=float), state.q.shape)
    command = np.clip(params.position_gain_per_s * (np.asarray(reference, dtype=float) - state.q), -limits, limits)
    return command, replace(state, q=state.q + command * dt, qd=command)


def admittance_step(
    params: ControlParams, state: AdmittanceState, wrench_error: Sequence[float], dt: float
) -> AdmittanceState:
    """One semi-implicit Euler step of ``M x'' + B x' + K x = e``.

    Damping is taken implicitly so large ``B * dt`` stays stable.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = params.admittance_mass_kg
    b = params.admittance_damping_ns_per_m
    k = params.admittance_stiffness_n_per_m
    e = np.asarray(wrench_error, dtype=float)
    velocity = (m * state.velocity + dt * (e - k * state.offset)) / (m + dt * b)
    return AdmittanceState(state.offset + dt * velocity, velocity)


def sag_shift(params: ControlParams, gravity: GravityFrame, wall_normal: np.ndarray = WALL_NORMAL) -> np.ndarray:
    """Feedforward offset opposing gravitational sag.

    The in-plane part of gravity is opposed in the plane; any pull away
    from the surface is opposed along the normal.
    """
    g = gravity.gravity
    normal = np.asarray(wall_normal, dtype=float)
    outward = float(g @ normal)
    tangential = g - outward * normal
    return -params.sag_gain_m_per_mps2 * (tangential + max(outward, 0.0) * normal)


def sag_feedforward(
    params: ControlParams,
    gravity: GravityFrame,
    reference: Sequence[float],
    wall_normal: np.ndarray = WALL_NORMAL,
) -> np.ndarray:
    return np.asarray(reference, dtype=float) + sag_shift(params, gravity, wall_normal)


def track_joint_reference(
    params: ControlParams,
    q0: Sequence[float],
    reference: Callable[[float], Sequence[float]],
    duration_s: float,
    velocity_limits: Sequence[float],
) -> pd.DataFrame:
    """Simulate position loops against a time-varying reference; one row per plant step."""
    tick = 1.0 / params.command_rate_hz
    sub = tick / params.plant_substeps
    state = PlantState(q=np.asarray(q0, dtype=float))
    rows = []
    command = np.zeros_like(state.q)
    ref = np.asarray(reference(0.0), dtype=float)
    for k in range(int(round(duration_s / tick))):
        t = k * tick
        ref = np.asarray(reference(t), dtype=float)
        command, _ = position_step(params, state, ref, tick, velocity_limits)
        for j in range(params.plant_substeps):
            state = replace(state, q=state.q + command * sub, qd=command)
            rows.append(
                {"t": t + (j + 1) * sub, "tick": k, **_columns("q", state.q), **_columns("ref", ref), **_columns("cmd", command)}
            )
    return pd.DataFrame(rows)


def _columns(prefix: str, values: np.ndarray) -> dict:
    return {f"{prefix}{i + 1}": float(v) for i, v in enumerate(np.atleast_1d(values))}


def square_wave(mean: float, amplitude: float, frequency_hz: float) -> Callable[[float], float]:
    def wave(t: float) -> float:
        return mean + (amplitude if (t * frequency_hz) % 1.0 < 0.5 else -amplitude)

    return wave


def simulate_force_tracking(
    params: ControlParams,
    reference: Callable[[float], float],
    duration_s: float,
    backlash_m: Optional[float] = None,
) -> pd.DataFrame:
    """Closed-loop admittance force control of one toe axis.

    The motor follows the admittance-corrected reference through the
    position loop; the toe follows the motor through a backlash deadband;
    contact deflection lags the toe by ``c / k``. Force feedback is the
    latest sensor sample.
    """
    k_c = params.contact_stiffness_n_per_m
    gap = params.backlash_m if backlash_m is None else backlash_m
    tick = 1.0 / params.command_rate_hz
    sub = tick / params.plant_substeps
    blend = 1.0 - np.exp(-sub * k_c / params.contact_damping_ns_per_m) if params.contact_damping_ns_per_m > 0 else 1.0
    sensor_period = 1.0 / params.sensor_rate_hz

    motor = reference(0.0) / k_c
    toe = motor
    deflection = toe
    measured = k_c * deflection
    last_sample = 0
    admittance = AdmittanceState.rest()
    state = PlantState(q=np.array([motor]))
    rows = []
    for k in range(int(round(duration_s / tick))):
        t = k * tick
        target = reference(t)
        admittance = admittance_step(params, admittance, [target - measured], tick)
        command_ref = target / k_c + admittance.offset
        command, _ = position_step(params, state, command_ref, tick, [params.toe_velocity_limit_m_s])
        for j in range(params.plant_substeps):
            motor += float(command[0]) * sub
            if motor - toe > 0.5 * gap:
                toe = motor - 0.5 * gap
            elif toe - motor > 0.5 * gap:
                toe = motor + 0.5 * gap
            deflection += (toe - deflection) * blend
            now = t + (j + 1) * sub
            sample = int(now / sensor_period + 1e-9)
            if sample != last_sample:
                last_sample = sample
                measured = k_c * deflection
        state = PlantState(
            q=np.array([motor]),
            qd=command,
            wrench=np.array([0.0, 0.0, k_c * deflection, 0.0, 0.0, 0.0]),
            backlash_offset=np.array([toe - motor]),
        )
        rows.append(
            {
                "t": t,
                "f_ref": target,
                "f_meas": k_c * deflection,
                "offset_m": float(admittance.offset[0]),
                "command_m_s": float(command[0]),
                "motor_m": motor,
                "toe_m": toe,
            }
        )
    return pd.DataFrame(rows)


def attenuation(trace: pd.DataFrame, settle_s: float) -> float:
    """One minus measured over commanded peak-to-peak force after ``settle_s``."""
    window = trace[trace["t"] >= settle_s]
    commanded = float(window["f_ref"].max() - window["f_ref"].min())
    if commanded <= 0:
        return 0.0
    return 1.0 - float(window["f_meas"].max() - window["f_meas"].min()) / commanded


def plateau_rms_error(trace: pd.DataFrame, frequency_hz: float, settle_s: float) -> float:
    """RMS force error over the second half of every half-period, relative to peak-to-peak."""
    window = trace[trace["t"] >= settle_s]
    phase = (window["t"] * frequency_hz) % 0.5
    plateau = window[phase >= 0.25]
    commanded = float(window["f_ref"].max() - window["f_ref"].min())
    error = plateau["f_meas"] - plateau["f_ref"]
    return float(np.sqrt(np.mean(error ** 2))) / commanded if commanded > 0 else 0.0


@dataclass(frozen=True)
class ExecutionSummary:
    log: pd.DataFrame
    max_joint_error_rad: float
    max_sag_residual_m: float
    ik_failures: int


def execute_plan(
    model: RobotModel,
    plan: PhasePlan,
    gravity: GravityFrame,
    feedforward: bool = True,
    rate_hz: Optional[float] = None,
) -> ExecutionSummary:
    """Track a plan's joint references with the position loops.

    Joint references are solved for the commanded body, which carries the
    sag feedforward when it is on. The plant places the body where those
    references put it through the attached toes, then lets it sag along
    gravity by the loaded deflection.
    """
    if not len(plan):
        return ExecutionSummary(pd.DataFrame(), 0.0, 0.0, 0)
    params = model.control
    tick = 1.0 / (rate_hz or params.command_rate_hz)
    active = model.dof_per_limb
    limits = np.asarray(model.limits.velocity_rad_s[:active])
    shift_vec = sag_shift(params, gravity)
    states = {}
    rows = []
    failures = 0
    worst_joint = 0.0
    worst_sag = 0.0
    for t in np.arange(0.0, plan.duration_s + 1e-12, tick):
        phase = plan.phase_at(t)
        body_ref = phase.body_position(t)
        body_cmd = body_ref + shift_vec if feedforward else body_ref
        shift = phase.shift_at(t)
        shoulders = shoulder_frames(model, shift)
        errors = []
        placed = []
        for limb in LIMB_IDS:
            toe = phase.toe_position(limb, t)
            try:
                config = solve_limb(model, limb, toe, body_cmd, shift, False)
            except KinematicsError:
                failures += 1
                continue
            q_ref = config.q[:active]
            if limb in phase.contacts:
                placed.append(toe - limb_fk(model, limb, config, shoulders[limb]).translation)
            state = states.get(limb) or PlantState(q=q_ref)
            _, state = position_step(params, state, q_ref, tick, limits)
            states[limb] = state
            errors.append(float(np.max(np.abs(state.q - q_ref))))
        body_actual = (np.mean(placed, axis=0) if placed else body_cmd) - shift_vec
        joint_error = max(errors, default=0.0)
        sag_residual = float(np.linalg.norm(body_actual - body_ref))
        worst_joint = max(worst_joint, joint_error)
        worst_sag = max(worst_sag, sag_residual)
        rows.append(
            {
                "t": float(t),
                "phase": phase.label,
                "body_y_ref": float(body_ref @ CLIMB_AXIS),
                "body_y_actual": float(body_actual @ CLIMB_AXIS),
                "joint_error_rad": joint_error,
                "sag_residual_m": sag_residual,
            }
        )
    if failures:
        logger.warning("%d joint references failed IK during execution", failures)
    return ExecutionSummary(pd.DataFrame(rows), worst_joint, worst_sag, failures)
