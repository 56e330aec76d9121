"""Shoulder + five-bar + spherical wrist chain.

Shoulder frames share the body axes. The shoulder joint turns about the
climb axis ``y``; the five-bar plane is embedded as ``(0, p1, -p0)`` so the
leg points into the wall at ``q1 = 0``. The wrist base is fixed to the
shoulder link, and the wrist is a Z-Y-Z chain whose middle joint sits at
``pi/2`` when the toe points straight into the wall.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..config import RobotModel
from ..geometry import RigidTransform, rot_y, rot_z
from .fivebar import (
    Branch,
    JointLimitViolation,
    NearSingular,
    Unreachable,
    WristGimbalLock,
    fivebar_fk,
    fivebar_ik,
    fivebar_jacobian,
    fivebar_manipulability,
)

logger = logging.getLogger(__name__)

_WRIST_MOUNT = rot_y(math.pi / 2)
_Y = np.array([0.0, 1.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class LimbConfig:
    """Six joint angles and the five-bar branch they were solved on."""

    q: np.ndarray
    branch: Branch = Branch.ELBOW_OUT

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float).reshape(6)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)


JointInput = Union[LimbConfig, Sequence[float], np.ndarray]


def _unpack(model: RobotModel, q: JointInput) -> tuple[np.ndarray, Branch]:
    if isinstance(q, LimbConfig):
        return q.q, q.branch
    return np.array(q, dtype=float).reshape(6), Branch(model.fivebar.branch)


def shoulder_frame(model: RobotModel, limb_id: str) -> RigidTransform:
    """Neutral shoulder frame in the body frame."""
    limb = model.limb(limb_id)
    return RigidTransform.from_translation([limb.shoulder_x_m, limb.shoulder_y_m, 0.0])


def home_toe_rotation() -> np.ndarray:
    """Toe frame whose z axis points into the wall."""
    return rot_y(math.pi)


def _embed(planar: np.ndarray) -> np.ndarray:
    return np.array([0.0, planar[1], -planar[0]])


def _wrist_rotation(q4: float, q5: float, q6: float) -> np.ndarray:
    return rot_z(q4) @ rot_y(q5) @ rot_z(q6)


def _chain(model: RobotModel, q: np.ndarray, branch: Branch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Wrist center, toe position and toe rotation in the shoulder frame."""
    r1 = rot_y(q[0])
    planar = fivebar_fk(model.fivebar, q[1], q[2], branch)
    wrist = r1 @ _embed(planar)
    if not model.is_climbing:
        toe = wrist + r1 @ np.array([0.0, 0.0, -model.wrist.walking_foot_offset_m])
        return wrist, toe, np.eye(3)
    rotation = r1 @ _WRIST_MOUNT @ _wrist_rotation(q[3], q[4], q[5])
    toe = wrist + rotation @ np.array([0.0, 0.0, model.wrist.toe_offset_m])
    return wrist, toe, rotation


def limb_fk(
    model: RobotModel,
    limb_id: str,
    q: JointInput,
    shoulder: Optional[RigidTransform] = None,
) -> RigidTransform:
    """Toe frame in the body frame.

    Walking models report an identity orientation for the point foot.
    """
    joints, branch = _unpack(model, q)
    shoulder = shoulder or shoulder_frame(model, limb_id)
    _, toe, rotation = _chain(model, joints, branch)
    if not model.is_climbing:
        return RigidTransform(np.eye(3), shoulder.apply(toe))
    return shoulder @ RigidTransform(rotation, toe)


def check_joint_limits(model: RobotModel, q: np.ndarray) -> None:
    lower, upper = model.limits.lower_rad, model.limits.upper_rad
    active = 6 if model.is_climbing else 3
    for i in range(active):
        if q[i] < lower[i] - 1e-12 or q[i] > upper[i] + 1e-12:
            raise JointLimitViolation(i, float(q[i]), lower[i], upper[i])


def limb_ik(
    model: RobotModel,
    limb_id: str,
    target: RigidTransform,
    branch: Optional[Branch] = None,
    shoulder: Optional[RigidTransform] = None,
    check_singularity: bool = True,
) -> LimbConfig:
    """Joint angles reaching ``target`` (a toe frame in the body frame).

    Raises Unreachable (including joint-limit violations), NearSingular or
    WristGimbalLock. The branch never changes from the one requested.
    """
    branch = branch or Branch(model.fivebar.branch)
    shoulder = shoulder or shoulder_frame(model, limb_id)
    local = shoulder.inverse() @ target

    if model.is_climbing:
        wrist = local.translation - local.rotation @ np.array([0.0, 0.0, model.wrist.toe_offset_m])
        lateral = math.hypot(wrist[0], wrist[2])
        p0 = lateral
    else:
        wrist = local.translation
        lateral = math.hypot(wrist[0], wrist[2])
        p0 = lateral - model.wrist.walking_foot_offset_m
    if lateral < 1e-9:
        raise Unreachable("target lies on the shoulder axis")
    q1 = math.atan2(-wrist[0], -wrist[2])
    q2, q3 = fivebar_ik(model.fivebar, np.array([p0, wrist[1]]), branch)

    q4 = q5 = q6 = 0.0
    if model.is_climbing:
        base = rot_y(q1) @ _WRIST_MOUNT
        r = base.T @ local.rotation
        sin5 = math.hypot(r[0, 2], r[1, 2])
        if sin5 < model.wrist.gimbal_tolerance:
            raise WristGimbalLock(f"wrist middle joint at {math.atan2(sin5, r[2, 2]):.2e} rad")
        q5 = math.atan2(sin5, r[2, 2])
        q4 = math.atan2(r[1, 2], r[0, 2])
        q6 = math.atan2(r[2, 1], -r[2, 0])

    q = np.array([q1, q2, q3, q4, q5, q6])
    check_joint_limits(model, q)
    if check_singularity:
        score = manipulability(model, limb_id, LimbConfig(q, branch))
        if score < model.manipulability_threshold:
            raise NearSingular(f"{limb_id} manipulability {score:.2e} below threshold")
    return LimbConfig(q, branch)


def limb_jacobian(
    model: RobotModel,
    limb_id: str,
    q: JointInput,
    shoulder: Optional[RigidTransform] = None,
) -> np.ndarray:
    """Analytic Jacobian in the body frame.

    Rows are ``[v; w]`` (6x6) for climbing limbs and ``v`` only (3x3) for
    walking limbs.
    """
    joints, branch = _unpack(model, q)
    shoulder = shoulder or shoulder_frame(model, limb_id)
    r1 = rot_y(joints[0])
    wrist, toe, _ = _chain(model, joints, branch)
    fb = fivebar_jacobian(model.fivebar, joints[1], joints[2], branch)

    linear = [np.cross(_Y, toe), r1 @ _embed(fb[:, 0]), r1 @ _embed(fb[:, 1])]
    angular = [_Y, np.zeros(3), np.zeros(3)]
    if model.is_climbing:
        base = r1 @ _WRIST_MOUNT
        axes = [
            base @ _Z,
            base @ rot_z(joints[3]) @ _Y,
            base @ rot_z(joints[3]) @ rot_y(joints[4]) @ _Z,
        ]
        for axis in axes:
            linear.append(np.cross(axis, toe - wrist))
            angular.append(axis)
        jac = np.vstack([np.column_stack(linear), np.column_stack(angular)])
        rot = np.kron(np.eye(2), shoulder.rotation)
        return rot @ jac
    return shoulder.rotation @ np.column_stack(linear)


def manipulability(model: RobotModel, limb_id: str, q: JointInput) -> float:
    """sqrt(det(J J^T)); zero where the five-bar closure degenerates."""
    joints, branch = _unpack(model, q)
    if fivebar_manipulability(model.fivebar, joints[1], joints[2], branch) == 0.0:
        return 0.0
    jac = limb_jacobian(model, limb_id, LimbConfig(joints, branch))
    return math.sqrt(max(float(np.linalg.det(jac @ jac.T)), 0.0))


def home_configuration(model: RobotModel, limb_id: str) -> LimbConfig:
    """Joints placing the five-bar at its nominal point with the toe into the wall."""
    p0, p1 = model.fivebar.nominal_point_m
    branch = Branch(model.fivebar.branch)
    q2, q3 = fivebar_ik(model.fivebar, np.array([p0, p1]), branch)
    wrist = (0.0, math.pi / 2, 0.0) if model.is_climbing else (0.0, 0.0, 0.0)
    return LimbConfig(np.array([0.0, q2, q3, *wrist]), branch)


def toe_target(position: Sequence[float]) -> RigidTransform:
    """Toe frame at ``position`` with the home orientation."""
    return RigidTransform(home_toe_rotation(), np.asarray(position, dtype=float))
