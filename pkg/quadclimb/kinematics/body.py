"""Body posture four-bar: which side lifts and where the shoulders sit.

The body frame is the center link. Each side carries its two shoulders on
the coupler of a parallelogram driven by the single posture actuator; the
left parallelogram is mirrored so one actuator angle advances the right
shoulders while retracting the left ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from ..config import RIGHT_LIMBS, FourBarParams, RobotModel
from ..geometry import RigidTransform
from .fivebar import KinematicsError
from .limb import shoulder_frame


class ShiftRangeError(KinematicsError):
    """Actuator angle outside the four-bar range, or an inconsistent state."""


class LiftSide(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    NEUTRAL = "neutral"

    @property
    def limbs(self) -> Tuple[str, ...]:
        if self is LiftSide.RIGHT:
            return RIGHT_LIMBS
        if self is LiftSide.LEFT:
            return ("FL", "BL")
        return ()

    @property
    def other(self) -> "LiftSide":
        if self is LiftSide.NEUTRAL:
            return self
        return LiftSide.LEFT if self is LiftSide.RIGHT else LiftSide.RIGHT


@dataclass(frozen=True)
class ShiftState:
    lift_side: LiftSide = LiftSide.NEUTRAL
    actuator_angle_rad: float = 0.0

    @classmethod
    def neutral(cls) -> "ShiftState":
        return cls()

    def swapped(self) -> "ShiftState":
        """Same linkage pose with the lift and anchor roles exchanged."""
        return ShiftState(self.lift_side.other, self.actuator_angle_rad)

    @property
    def anchor_limbs(self) -> Tuple[str, ...]:
        return self.lift_side.other.limbs


def grashof_class(p: FourBarParams) -> str:
    """Grashof classification of the linkage."""
    links = sorted([p.crank_m, p.rocker_m, p.coupler_m, p.ground_m])
    lhs, rhs = links[0] + links[3], links[1] + links[2]
    if math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12):
        return "change_point"
    return "grashof" if lhs < rhs else "non_grashof"


def stroke_gain(p: FourBarParams) -> float:
    """Lift-side advance per radian of actuator travel, averaged over the range."""
    return p.stroke_m / (2.0 * p.max_angle_rad)


def validate_state(p: FourBarParams, state: ShiftState) -> None:
    angle = state.actuator_angle_rad
    if abs(angle) > p.max_angle_rad + 1e-12:
        raise ShiftRangeError(f"actuator angle {angle:.4f} rad outside +/-{p.max_angle_rad:.4f}")
    if state.lift_side is LiftSide.NEUTRAL and abs(angle) > 1e-12:
        raise ShiftRangeError("neutral state requires the symmetric linkage pose")


def coupler_displacement(p: FourBarParams, angle: float) -> Tuple[np.ndarray, float]:
    """Coupler translation (outward, forward) from neutral, and closure residual.

    The rocker end is found by intersecting the rocker and coupler circles,
    taking the solution nearest the parallel branch.
    """
    crank_end = np.array([p.crank_m * math.cos(angle), p.crank_m * math.sin(angle)])
    rocker_pivot = np.array([0.0, p.ground_m])
    chord = rocker_pivot - crank_end
    dist = float(np.linalg.norm(chord))
    along = (dist * dist + p.coupler_m ** 2 - p.rocker_m ** 2) / (2.0 * dist)
    height = math.sqrt(max(p.coupler_m ** 2 - along * along, 0.0))
    unit = chord / dist
    normal = np.array([-unit[1], unit[0]])
    guess = rocker_pivot + crank_end * (p.rocker_m / p.crank_m)
    candidates = [crank_end + along * unit + s * height * normal for s in (1.0, -1.0)]
    rocker_end = min(candidates, key=lambda c: float(np.linalg.norm(c - guess)))
    residual = max(
        abs(float(np.linalg.norm(rocker_end - crank_end)) - p.coupler_m),
        abs(float(np.linalg.norm(rocker_end - rocker_pivot)) - p.rocker_m),
    )
    return crank_end - np.array([p.crank_m, 0.0]), residual


def shoulder_frames(model: RobotModel, state: ShiftState) -> Dict[str, RigidTransform]:
    """Shoulder frames in the body (center link) frame for a shift state."""
    p = model.fourbar
    validate_state(p, state)
    right, _ = coupler_displacement(p, state.actuator_angle_rad)
    left, _ = coupler_displacement(p, -state.actuator_angle_rad)
    frames = {}
    for limb in model.limbs:
        base = shoulder_frame(model, limb.limb_id)
        if limb.is_right:
            offset = np.array([right[0], right[1], 0.0])
        else:
            offset = np.array([-left[0], left[1], 0.0])
        frames[limb.limb_id] = RigidTransform(base.rotation, base.translation + offset)
    return frames


def center_link_frame(model: RobotModel, state: ShiftState) -> RigidTransform:
    """The battery and IMU mount; it defines the body frame."""
    validate_state(model.fourbar, state)
    return RigidTransform.identity()


def body_advance(model: RobotModel, start: ShiftState, end: ShiftState) -> float:
    """World displacement of the body along the climb axis between two states.

    The anchor side of ``start`` holds still in the world, so the body moves
    opposite to the anchor shoulders' motion in the body frame.
    """
    anchor = start.anchor_limbs
    if not anchor:
        return 0.0
    before = shoulder_frames(model, start)[anchor[0]].translation[1]
    after = shoulder_frames(model, ShiftState(start.lift_side, end.actuator_angle_rad))[anchor[0]].translation[1]
    return float(before - after)


def lift_sweep(p: FourBarParams, side: LiftSide, stroke_m: float) -> Tuple[float, float]:
    """Start and end actuator angles for a lift of ``stroke_m`` on ``side``."""
    if side is LiftSide.NEUTRAL:
        raise ShiftRangeError("a lift needs a lift side")
    half = 0.5 * stroke_m
    if half > p.max_half_stroke_m + 1e-12:
        raise ShiftRangeError(f"stroke {stroke_m:.4f} m exceeds the linkage stroke {p.stroke_m:.4f} m")
    angle = math.asin(min(half / p.crank_m, 1.0))
    return (-angle, angle) if side is LiftSide.RIGHT else (angle, -angle)


def body_thrust(state: ShiftState, lifting: bool, p: FourBarParams | None = None) -> float:
    """Axial thrust along the climb axis from the posture actuator, in N."""
    if not lifting or state.lift_side is LiftSide.NEUTRAL:
        return 0.0
    return (p or FourBarParams()).thrust_n


def lift_side_center(model: RobotModel, state: ShiftState) -> np.ndarray:
    """Midpoint of the lifted side's shoulders, in the body frame.

    The actuator thrust acts on the lifted half; a neutral state has no
    lifted half and returns the body origin.
    """
    limbs = state.lift_side.limbs
    if not limbs:
        return np.zeros(3)
    frames = shoulder_frames(model, state)
    return np.mean([frames[limb].translation for limb in limbs], axis=0)
