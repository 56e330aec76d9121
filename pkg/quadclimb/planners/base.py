"""Phase plans, stance state and the timing and replay helpers every planner shares."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..config import LIMB_IDS, ConfigurationError, QuadclimbError, RobotModel
from ..geometry import WALL_NORMAL, RigidTransform
from ..kinematics import LiftSide, LimbConfig, ShiftState, limb_fk, limb_ik, shoulder_frames, toe_target

logger = logging.getLogger(__name__)


class PlanningError(QuadclimbError):
    """Base class for planner failures."""


class StrokeExceeded(PlanningError):
    """Requested body lift is longer than the four-bar stroke."""


class HoldUnreachable(PlanningError):
    def __init__(self, limb: str, hold_id: str, reason: str = ""):
        self.limb = limb
        self.hold_id = hold_id
        super().__init__(f"{limb} cannot reach hold {hold_id}" + (f": {reason}" if reason else ""))


class NoStableOrder(PlanningError):
    """No swing order keeps enough limbs attached."""


class SpeedInfeasible(PlanningError):
    def __init__(self, velocity: float, limit: float):
        self.velocity = velocity
        self.limit = limit
        super().__init__(f"commanded joint velocity {velocity:.2f} rad/s exceeds {limit:.2f} rad/s")


class PhaseKind(str, Enum):
    SWING_LIMB = "swing_limb"
    BODY_LIFT = "body_lift"
    BODY_ADVANCE = "body_advance"
    TROT_PAIR = "trot_pair"


def quintic(s: float) -> float:
    """Rest-to-rest time scaling on [0, 1]."""
    s = min(max(s, 0.0), 1.0)
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


def _bump(s: float) -> float:
    s = min(max(s, 0.0), 1.0)
    return 16.0 * s * s * (1.0 - s) * (1.0 - s)


@dataclass(frozen=True)
class ToePath:
    """Straight move with a clearance bump along the surface normal."""

    start: np.ndarray
    end: np.ndarray
    clearance_m: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "end", np.asarray(self.end, dtype=float))

    @classmethod
    def hold(cls, position: Sequence[float]) -> "ToePath":
        return cls(position, position)

    def at(self, s: float) -> np.ndarray:
        return self.start + (self.end - self.start) * quintic(s) + self.clearance_m * _bump(s) * WALL_NORMAL


@dataclass(frozen=True)
class GripperCommand:
    release_fraction: float
    regrasp_fraction: float


@dataclass(frozen=True)
class Phase:
    kind: PhaseKind
    start_time_s: float
    duration_s: float
    body_start: np.ndarray
    body_end: np.ndarray
    toe_paths: Mapping[str, ToePath]
    contacts: Tuple[str, ...]
    shift_start: ShiftState = field(default_factory=ShiftState)
    shift_end: ShiftState = field(default_factory=ShiftState)
    holds: Mapping[str, Optional[str]] = field(default_factory=dict)
    gripper_commands: Mapping[str, GripperCommand] = field(default_factory=dict)
    limb: Optional[str] = None
    side: Optional[LiftSide] = None
    diagonal: Optional[Tuple[str, str]] = None

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ConfigurationError(f"{self.kind.value} phase needs a positive duration")
        object.__setattr__(self, "body_start", np.asarray(self.body_start, dtype=float))
        object.__setattr__(self, "body_end", np.asarray(self.body_end, dtype=float))

    @property
    def end_time_s(self) -> float:
        return self.start_time_s + self.duration_s

    @property
    def label(self) -> str:
        detail = self.limb or (self.side.value if self.side else None) or ("+".join(self.diagonal) if self.diagonal else "")
        return f"{self.kind.value}({detail})" if detail else self.kind.value

    @property
    def swinging(self) -> Tuple[str, ...]:
        return tuple(limb for limb in LIMB_IDS if limb not in self.contacts)

    @property
    def lifting(self) -> bool:
        return self.kind is PhaseKind.BODY_LIFT

    def fraction(self, t: float) -> float:
        return min(max((t - self.start_time_s) / self.duration_s, 0.0), 1.0)

    def body_position(self, t: float) -> np.ndarray:
        return self.body_start + (self.body_end - self.body_start) * quintic(self.fraction(t))

    def toe_position(self, limb: str, t: float) -> np.ndarray:
        return self.toe_paths[limb].at(self.fraction(t))

    def shift_at(self, t: float) -> ShiftState:
        # Interpolating sin(angle) keeps the coupler translation in step with the body.
        s = quintic(self.fraction(t))
        lo = np.sin(self.shift_start.actuator_angle_rad)
        hi = np.sin(self.shift_end.actuator_angle_rad)
        angle = float(np.arcsin(np.clip(lo + s * (hi - lo), -1.0, 1.0)))
        side = self.shift_start.lift_side
        if side is LiftSide.NEUTRAL:
            side = self.shift_end.lift_side
        if side is LiftSide.NEUTRAL:
            angle = 0.0
        return ShiftState(side, angle)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "label": self.label,
            "start_time_s": self.start_time_s,
            "duration_s": self.duration_s,
            "body_start_m": self.body_start.tolist(),
            "body_end_m": self.body_end.tolist(),
            "contacts": list(self.contacts),
            "holds": dict(self.holds),
            "toe_paths_m": {
                limb: {"start": p.start.tolist(), "end": p.end.tolist(), "clearance": p.clearance_m}
                for limb, p in self.toe_paths.items()
            },
            "shift_start": [self.shift_start.lift_side.value, self.shift_start.actuator_angle_rad],
            "shift_end": [self.shift_end.lift_side.value, self.shift_end.actuator_angle_rad],
            "gripper_commands": {
                limb: [c.release_fraction, c.regrasp_fraction] for limb, c in self.gripper_commands.items()
            },
        }


@dataclass(frozen=True)
class PhasePlan:
    phases: Tuple[Phase, ...]
    configuration: str
    name: str = ""

    def __iter__(self) -> Iterator[Phase]:
        return iter(self.phases)

    def __len__(self) -> int:
        return len(self.phases)

    @property
    def duration_s(self) -> float:
        return self.phases[-1].end_time_s if self.phases else 0.0

    @property
    def body_displacement_m(self) -> np.ndarray:
        if not self.phases:
            return np.zeros(3)
        return self.phases[-1].body_end - self.phases[0].body_start

    def phase_at(self, t: float) -> Phase:
        if not self.phases:
            raise ConfigurationError("empty plan has no phases")
        for phase in self.phases:
            if t < phase.end_time_s:
                return phase
        return self.phases[-1]

    def body_pose(self, t: float) -> RigidTransform:
        return RigidTransform.from_translation(self.phase_at(t).body_position(t))

    def toe_position(self, limb: str, t: float) -> np.ndarray:
        return self.phase_at(t).toe_position(limb, t)

    def shift_at(self, t: float) -> ShiftState:
        return self.phase_at(t).shift_at(t)

    def continuity_gap(self) -> float:
        """Largest body or toe jump across a phase boundary, in m."""
        gap = 0.0
        for prev, nxt in zip(self.phases, self.phases[1:]):
            gap = max(gap, float(np.linalg.norm(prev.body_end - nxt.body_start)))
            for limb in LIMB_IDS:
                jump = prev.toe_paths[limb].at(1.0) - nxt.toe_paths[limb].at(0.0)
                gap = max(gap, float(np.linalg.norm(jump)))
        return gap

    def sample(self, dt: float = 0.1) -> pd.DataFrame:
        """Time series of body position, toe positions and contact flags."""
        rows = []
        times = np.arange(0.0, self.duration_s + 0.5 * dt, dt) if self.phases else np.array([])
        for t in times:
            phase = self.phase_at(float(t))
            body = phase.body_position(float(t))
            row: Dict[str, Any] = {"t": float(t), "phase": phase.label}
            row.update({"body_x": body[0], "body_y": body[1], "body_z": body[2]})
            for limb in LIMB_IDS:
                toe = phase.toe_position(limb, float(t))
                row.update({f"{limb}_x": toe[0], f"{limb}_y": toe[1], f"{limb}_z": toe[2]})
                row[f"{limb}_contact"] = limb in phase.contacts
            rows.append(row)
        return pd.DataFrame(rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "configuration": self.configuration,
            "duration_s": self.duration_s,
            "body_displacement_m": self.body_displacement_m.tolist(),
            "phases": [phase.to_dict() for phase in self.phases],
        }


@dataclass(frozen=True)
class Attachment:
    hold_id: Optional[str]
    grasp_force_n: float


@dataclass(frozen=True)
class StanceState:
    """Body pose, shift, joints and attachments at one instant."""

    body_pose: RigidTransform
    shift: ShiftState
    joints: Mapping[str, LimbConfig]
    attachments: Mapping[str, Optional[Attachment]]
    payload_kg: float = 0.0
    payload_point_m: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def attached(self) -> Tuple[str, ...]:
        return tuple(limb for limb in LIMB_IDS if self.attachments.get(limb) is not None)

    def toe_positions(self, model: RobotModel) -> Dict[str, np.ndarray]:
        frames = shoulder_frames(model, self.shift)
        return {
            limb: self.body_pose.apply(limb_fk(model, limb, q, frames[limb]).translation)
            for limb, q in self.joints.items()
        }


def solve_limb(
    model: RobotModel,
    limb: str,
    toe_world: np.ndarray,
    body_position: np.ndarray,
    shift: ShiftState,
    check_singularity: bool = True,
) -> LimbConfig:
    """IK for a world toe position with the body at ``body_position``."""
    local = np.asarray(toe_world, dtype=float) - np.asarray(body_position, dtype=float)
    target = toe_target(local) if model.is_climbing else RigidTransform.from_translation(local)
    return limb_ik(model, limb, target, shoulder=shoulder_frames(model, shift)[limb], check_singularity=check_singularity)


def stance_from_toes(
    model: RobotModel,
    body_position: np.ndarray,
    shift: ShiftState,
    toes: Mapping[str, np.ndarray],
    holds: Optional[Mapping[str, Optional[str]]] = None,
    payload_kg: float = 0.0,
) -> StanceState:
    """Stance with every limb attached at the given toe positions."""
    holds = holds or {}
    preload = model.goat.nominal_fingertip_force_n if model.is_climbing else 0.0
    joints = {limb: solve_limb(model, limb, toes[limb], body_position, shift) for limb in LIMB_IDS}
    return StanceState(
        body_pose=RigidTransform.from_translation(body_position),
        shift=shift,
        joints=joints,
        attachments={limb: Attachment(holds.get(limb), preload) for limb in LIMB_IDS},
        payload_kg=payload_kg,
    )


def validate_stance(
    model: RobotModel, stance: StanceState, grasp_points: Mapping[str, np.ndarray], swinging: bool = False
) -> None:
    """Attached toes sit on their grasp points; enough limbs stay attached."""
    needed = 3 if swinging and model.is_climbing else 2
    if len(stance.attached) < needed:
        raise ConfigurationError(f"{len(stance.attached)} attachments, need at least {needed}")
    toes = stance.toe_positions(model)
    for limb in stance.attached:
        if limb in grasp_points and np.linalg.norm(toes[limb] - grasp_points[limb]) > 1e-6:
            raise ConfigurationError(f"{limb} toe is off its grasp point")


def joint_travel_time(model: RobotModel, path: Sequence[LimbConfig]) -> float:
    """Time to follow a sampled joint path at the velocity limits."""
    if len(path) < 2:
        return 0.0
    active = model.dof_per_limb
    q = np.array([c.q[:active] for c in path])
    travel = np.abs(np.diff(q, axis=0)).sum(axis=0)
    return float(np.max(travel / np.asarray(model.limits.velocity_rad_s[:active])))


def phase_travel_time(model: RobotModel, draft: "Phase", samples: int = 9) -> float:
    """Slowest limb's joint travel time over a phase geometry."""
    worst = 0.0
    for limb in LIMB_IDS:
        path = []
        for s in np.linspace(0.0, 1.0, samples):
            t = draft.start_time_s + s * draft.duration_s
            path.append(
                solve_limb(
                    model,
                    limb,
                    draft.toe_position(limb, t),
                    draft.body_position(t),
                    draft.shift_at(t),
                    check_singularity=False,
                )
            )
        worst = max(worst, joint_travel_time(model, path))
    if draft.shift_start.actuator_angle_rad != draft.shift_end.actuator_angle_rad:
        sweep = abs(draft.shift_end.actuator_angle_rad - draft.shift_start.actuator_angle_rad)
        worst = max(worst, sweep / model.fourbar.actuator_velocity_rad_s)
    return worst


def replay(model: RobotModel, plan: PhasePlan, samples_per_phase: int = 5) -> int:
    """Run every sampled toe target through IK; returns the number of solves.

    Raises the first kinematic error met.
    """
    count = 0
    for phase in plan:
        for s in np.linspace(0.0, 1.0, samples_per_phase):
            t = phase.start_time_s + s * phase.duration_s
            body = phase.body_position(t)
            shift = phase.shift_at(t)
            for limb in LIMB_IDS:
                solve_limb(model, limb, phase.toe_position(limb, t), body, shift)
                count += 1
    return count


def retimed(phase: Phase, start_time_s: float, duration_s: float) -> Phase:
    """Copy of ``phase`` with a new start time and duration."""
    return replace(phase, start_time_s=start_time_s, duration_s=duration_s)


def gripper_time(model: RobotModel, command: Optional[GripperCommand]) -> float:
    if command is None:
        return 0.0
    full = model.goat.full_stroke_time_s
    return (command.release_fraction + command.regrasp_fraction) * full


def timed_phase(model: RobotModel, draft: Phase, start_time_s: float, samples: int = 9) -> Phase:
    """Apply the timing model to a draft phase built with unit duration."""
    travel = phase_travel_time(model, draft, samples)
    grip = max((gripper_time(model, c) for c in draft.gripper_commands.values()), default=0.0)
    duration = max(travel, grip) + model.timing.settle_s
    if duration <= 0:
        duration = 1e-3
    return retimed(draft, start_time_s, duration)


def chain_phases(model: RobotModel, drafts: List[Phase]) -> Tuple[Phase, ...]:
    phases = []
    clock = 0.0
    for draft in drafts:
        phase = timed_phase(model, draft, clock)
        logger.debug("%s lasts %.2f s", phase.label, phase.duration_s)
        phases.append(phase)
        clock = phase.end_time_s
    return tuple(phases)


def nominal_toes(model: RobotModel, body_position: np.ndarray, shift: ShiftState) -> Dict[str, np.ndarray]:
    """World toe positions with every five-bar at its nominal reach."""
    frames = shoulder_frames(model, shift)
    height = model.body_height_m
    toes = {}
    for limb in model.limbs:
        shoulder = frames[limb.limb_id].translation
        toes[limb.limb_id] = np.asarray(body_position, dtype=float) + np.array(
            [shoulder[0], shoulder[1] + limb.nominal_reach_m, -height]
        )
    return toes
