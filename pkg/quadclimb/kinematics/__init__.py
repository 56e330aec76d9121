"""Limb and body kinematics."""

from .body import (
    LiftSide,
    ShiftRangeError,
    ShiftState,
    body_advance,
    body_thrust,
    center_link_frame,
    grashof_class,
    lift_side_center,
    lift_sweep,
    shoulder_frames,
    stroke_gain,
)
from .fivebar import (
    Branch,
    ClosureInfeasible,
    JointLimitViolation,
    KinematicsError,
    NearSingular,
    Unreachable,
    WristGimbalLock,
    fivebar_fk,
    fivebar_ik,
    fivebar_jacobian,
    fivebar_manipulability,
    parallel_singularity_measure,
    worst_singularity_measure,
)
from .limb import (
    LimbConfig,
    home_configuration,
    home_toe_rotation,
    limb_fk,
    limb_ik,
    limb_jacobian,
    manipulability,
    shoulder_frame,
    toe_target,
)

__all__ = [
    "Branch",
    "ClosureInfeasible",
    "JointLimitViolation",
    "KinematicsError",
    "LiftSide",
    "LimbConfig",
    "NearSingular",
    "ShiftRangeError",
    "ShiftState",
    "Unreachable",
    "WristGimbalLock",
    "body_advance",
    "body_thrust",
    "center_link_frame",
    "fivebar_fk",
    "fivebar_ik",
    "fivebar_jacobian",
    "fivebar_manipulability",
    "grashof_class",
    "home_configuration",
    "home_toe_rotation",
    "lift_side_center",
    "lift_sweep",
    "limb_fk",
    "limb_ik",
    "limb_jacobian",
    "manipulability",
    "parallel_singularity_measure",
    "shoulder_frame",
    "shoulder_frames",
    "stroke_gain",
    "toe_target",
    "worst_singularity_measure",
]
