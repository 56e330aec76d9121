"""Shifting-torso gait: each side swings its front limb, lifts, then swings its back limb.

During a lift the anchor side holds still in the world while the posture
actuator carries the body one stroke forward and the lift-side shoulders
two strokes forward. Each toe therefore swings two strokes per cycle, and
starts the cycle one stroke behind (front limbs) or ahead (back limbs) of
its nominal reach so the excursions stay centered.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import FRONT_LIMBS, LIMB_IDS, ConfigurationError, RobotModel, TimingParams
from ..geometry import CLIMB_AXIS
from ..kinematics import LiftSide, ShiftState, lift_sweep, shoulder_frames
from ..kinematics.body import ShiftRangeError
from .base import GripperCommand, Phase, PhaseKind, PhasePlan, StrokeExceeded, ToePath, chain_phases

logger = logging.getLogger(__name__)


def skate_start_toes(
    model: RobotModel, body_position: np.ndarray, shift: ShiftState, lift_stroke_m: float
) -> Dict[str, np.ndarray]:
    """World toe positions at the start of a cycle."""
    frames = shoulder_frames(model, shift)
    toes = {}
    for limb in model.limbs:
        lead = -lift_stroke_m if limb.is_front else lift_stroke_m
        shoulder = frames[limb.limb_id].translation
        toes[limb.limb_id] = np.asarray(body_position, dtype=float) + np.array(
            [shoulder[0], shoulder[1] + limb.nominal_reach_m + lead, -model.body_height_m]
        )
    return toes


def _swing(limb: str, toes: Dict[str, np.ndarray], body: np.ndarray, shift: ShiftState, advance: float, clearance: float, command: GripperCommand) -> Phase:
    target = toes[limb] + advance * CLIMB_AXIS
    paths = {other: ToePath.hold(toes[other]) for other in LIMB_IDS}
    paths[limb] = ToePath(toes[limb], target, clearance)
    toes[limb] = target
    return Phase(
        kind=PhaseKind.SWING_LIMB,
        start_time_s=0.0,
        duration_s=1.0,
        body_start=body,
        body_end=body,
        toe_paths=paths,
        contacts=tuple(other for other in LIMB_IDS if other != limb),
        shift_start=shift,
        shift_end=shift,
        gripper_commands={limb: command},
        limb=limb,
    )


def plan_skate_cycle(
    model: RobotModel,
    climb_axis: Sequence[float] = CLIMB_AXIS,
    lift_stroke_m: float = 0.075,
    timing: Optional[TimingParams] = None,
    cycles: int = 1,
    first_side: LiftSide = LiftSide.RIGHT,
    start_body: Sequence[float] = (0.0, 0.0, 0.0),
    name: str = "skate",
) -> PhasePlan:
    """Timed SKATE plan; the body advances two strokes per cycle."""
    axis = np.asarray(climb_axis, dtype=float)
    if not np.allclose(axis / np.linalg.norm(axis), CLIMB_AXIS):
        raise ConfigurationError("plans are laid out along the wall frame's climb axis")
    if lift_stroke_m < 0:
        raise ConfigurationError("lift stroke must be non-negative")
    if lift_stroke_m > model.fourbar.stroke_m + 1e-12:
        raise StrokeExceeded(f"lift stroke {lift_stroke_m:.4f} m exceeds linkage stroke {model.fourbar.stroke_m:.4f} m")
    if first_side is LiftSide.NEUTRAL:
        raise ConfigurationError("the first lift side must be left or right")
    if timing is not None:
        model = model.model_copy(update={"timing": timing})

    try:
        first_start, _ = lift_sweep(model.fourbar, first_side, lift_stroke_m)
    except ShiftRangeError as e:
        raise StrokeExceeded(str(e)) from e
    shift = ShiftState(first_side, first_start)
    body = np.asarray(start_body, dtype=float)
    toes = skate_start_toes(model, body, shift, lift_stroke_m)
    command = GripperCommand(model.timing.skate_release_fraction, model.timing.skate_regrasp_fraction)
    clearance = model.timing.swing_clearance_m
    swing_length = 2.0 * lift_stroke_m

    drafts: List[Phase] = []
    side = first_side
    for _ in range(cycles * 2):
        front, back = [limb for limb in side.limbs if limb in FRONT_LIMBS][0], [limb for limb in side.limbs if limb not in FRONT_LIMBS][0]
        shift = ShiftState(side, shift.actuator_angle_rad)
        drafts.append(_swing(front, toes, body, shift, swing_length, clearance, command))

        start_angle, end_angle = lift_sweep(model.fourbar, side, lift_stroke_m)
        lifted = ShiftState(side, end_angle)
        new_body = body + lift_stroke_m * CLIMB_AXIS
        drafts.append(
            Phase(
                kind=PhaseKind.BODY_LIFT,
                start_time_s=0.0,
                duration_s=1.0,
                body_start=body,
                body_end=new_body,
                toe_paths={limb: ToePath.hold(toes[limb]) for limb in LIMB_IDS},
                contacts=LIMB_IDS,
                shift_start=ShiftState(side, start_angle),
                shift_end=lifted,
                side=side,
            )
        )
        body, shift = new_body, lifted
        drafts.append(_swing(back, toes, body, shift, swing_length, clearance, command))
        side = side.other

    phases = chain_phases(model, drafts)
    plan = PhasePlan(phases, model.configuration, name)
    logger.info(
        "SKATE plan: %d phases, %.1f s, %.3f m advance",
        len(plan),
        plan.duration_s,
        float(plan.body_displacement_m @ CLIMB_AXIS),
    )
    return plan
