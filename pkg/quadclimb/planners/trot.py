"""Ground trot for the walking configuration."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import LIMB_IDS, ConfigurationError, RobotModel
from ..kinematics import KinematicsError, ShiftState, shoulder_frames
from .base import Phase, PhaseKind, PhasePlan, SpeedInfeasible, ToePath, solve_limb

logger = logging.getLogger(__name__)

DIAGONALS: Tuple[Tuple[str, str], Tuple[str, str]] = (("FR", "BL"), ("FL", "BR"))


def _stance_toe(model: RobotModel, limb: str, body: np.ndarray, offset: float) -> np.ndarray:
    shoulder = shoulder_frames(model, ShiftState.neutral())[limb].translation
    reach = model.limb(limb).nominal_reach_m
    return body + np.array([shoulder[0], shoulder[1] + reach + offset, -model.body_height_m])


def _check_stride(model: RobotModel, body: np.ndarray, stride_m: float) -> None:
    for limb in LIMB_IDS:
        for offset in (-0.5 * stride_m, 0.5 * stride_m):
            try:
                solve_limb(model, limb, _stance_toe(model, limb, body, offset), body, ShiftState.neutral())
            except KinematicsError as e:
                raise ConfigurationError(f"stride {stride_m:.3f} m leaves the {limb} workspace: {e}") from e


def joint_velocity_peak(model: RobotModel, plan: PhasePlan, command_rate_hz: float) -> float:
    """Largest joint speed over the plan sampled at the command rate, as a fraction of each joint's limit."""
    dt = 1.0 / command_rate_hz
    active = model.dof_per_limb
    limits = np.asarray(model.limits.velocity_rad_s[:active])
    worst = 0.0
    for phase in plan:
        steps = max(2, int(np.ceil(phase.duration_s / dt)) + 1)
        times = np.linspace(phase.start_time_s, phase.end_time_s, steps)
        step = times[1] - times[0]
        for limb in LIMB_IDS:
            q = np.array(
                [
                    solve_limb(
                        model, limb, phase.toe_position(limb, t), phase.body_position(t), ShiftState.neutral(), False
                    ).q[:active]
                    for t in times
                ]
            )
            rates = np.abs(np.diff(q, axis=0)) / step
            worst = max(worst, float(np.max(rates / limits)))
    return worst


def plan_trot(
    model: RobotModel,
    speed_m_s: float,
    stride_m: float = 0.15,
    duty_factor: float = 0.5,
    cycles: int = 2,
    clearance_m: Optional[float] = None,
    start_body: Sequence[float] = (0.0, 0.0, 0.0),
    name: str = "trot",
) -> PhasePlan:
    """Alternating diagonal pairs at a constant average body speed.

    Duty factors above 0.5 insert four-foot support between the pair swings.
    """
    if model.is_climbing:
        raise ConfigurationError("trotting needs the walking configuration")
    if speed_m_s <= 0 or stride_m <= 0:
        raise ConfigurationError("speed and stride must be positive")
    if not 0.5 <= duty_factor < 1.0:
        raise ConfigurationError(f"duty factor {duty_factor} outside [0.5, 1)")
    if cycles < 1:
        raise ConfigurationError("need at least one cycle")

    clearance = model.timing.swing_clearance_m if clearance_m is None else clearance_m
    body = np.asarray(start_body, dtype=float)
    _check_stride(model, body, stride_m)

    stance = stride_m / speed_m_s
    period = stance / duty_factor
    swing = period - stance
    support = 0.5 * (stance - swing)
    first, second = DIAGONALS
    toes: Dict[str, np.ndarray] = {}
    for limb in first:
        toes[limb] = _stance_toe(model, limb, body, -0.5 * stride_m)
    for limb in second:
        toes[limb] = _stance_toe(model, limb, body, -0.5 * stride_m + 0.5 * stride_m / duty_factor)

    phases: List[Phase] = []
    clock = 0.0
    for _ in range(cycles):
        for diagonal in DIAGONALS:
            end_body = body + np.array([0.0, speed_m_s * swing, 0.0])
            paths = {limb: ToePath.hold(toes[limb]) for limb in LIMB_IDS}
            for limb in diagonal:
                landing = _stance_toe(model, limb, end_body, 0.5 * stride_m)
                paths[limb] = ToePath(toes[limb], landing, clearance)
                toes[limb] = landing
            phases.append(
                Phase(
                    kind=PhaseKind.TROT_PAIR,
                    start_time_s=clock,
                    duration_s=swing,
                    body_start=body,
                    body_end=end_body,
                    toe_paths=paths,
                    contacts=tuple(limb for limb in LIMB_IDS if limb not in diagonal),
                    diagonal=diagonal,
                )
            )
            clock += swing
            body = end_body
            if support > 1e-12:
                end_body = body + np.array([0.0, speed_m_s * support, 0.0])
                phases.append(
                    Phase(
                        kind=PhaseKind.BODY_ADVANCE,
                        start_time_s=clock,
                        duration_s=support,
                        body_start=body,
                        body_end=end_body,
                        toe_paths={limb: ToePath.hold(toes[limb]) for limb in LIMB_IDS},
                        contacts=LIMB_IDS,
                    )
                )
                clock += support
                body = end_body

    plan = PhasePlan(tuple(phases), model.configuration, name)
    peak = joint_velocity_peak(model, plan, model.control.command_rate_hz)
    if peak > 1.0:
        raise SpeedInfeasible(peak * max(model.limits.velocity_rad_s), max(model.limits.velocity_rad_s))
    logger.info("trot at %.3f m/s: %d phases, peak joint speed %.0f%% of limit", speed_m_s, len(plan), 100 * peak)
    return plan
