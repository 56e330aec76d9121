"""Discrete hold-to-hold climbing: one limb at a time, body moved only when needed."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..config import LIMB_IDS, RobotModel
from ..geometry import CLIMB_AXIS
from ..kinematics import KinematicsError, LiftSide, ShiftState, shoulder_frames
from ..mapping import Hold, SparseMap
from .base import (
    GripperCommand,
    HoldUnreachable,
    NoStableOrder,
    Phase,
    PhaseKind,
    PhasePlan,
    ToePath,
    chain_phases,
    solve_limb,
)

logger = logging.getLogger(__name__)

DEFAULT_ORDER: Tuple[str, ...] = ("FR", "BR", "FL", "BL")
_SCAN_HALF_WIDTH_M = 0.6
_SCAN_STEP_M = 0.01
_BOUNDARY_MARGIN_M = 0.005


@dataclass(frozen=True)
class ColumnLayout:
    sdm: SparseMap
    start_holds: Dict[str, str]
    goal_holds: Dict[str, str]
    start_body: np.ndarray


def make_column_map(
    model: RobotModel,
    rungs: int = 4,
    spacing_m: float = 0.0875,
    start_body: Sequence[float] = (0.0, 0.0, 0.0),
    hold_semi_axes_m: Tuple[float, float, float] = (0.02, 0.02, 0.015),
) -> ColumnLayout:
    """A straight column of holds above each toe's nominal position."""
    body = np.asarray(start_body, dtype=float)
    frames = shoulder_frames(model, ShiftState.neutral())
    holds: Dict[str, Hold] = {}
    for limb in model.limbs:
        shoulder = frames[limb.limb_id].translation
        base = body + np.array([shoulder[0], shoulder[1] + limb.nominal_reach_m, -model.body_height_m])
        for k in range(rungs + 1):
            hold_id = f"{limb.limb_id}-{k}"
            holds[hold_id] = Hold(
                hold_id=hold_id,
                center_m=tuple(base + k * spacing_m * CLIMB_AXIS),
                semi_axes_m=hold_semi_axes_m,
                orientation=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
            )
    return ColumnLayout(
        sdm=SparseMap(holds=holds),
        start_holds={limb: f"{limb}-0" for limb in LIMB_IDS},
        goal_holds={limb: f"{limb}-{rungs}" for limb in LIMB_IDS},
        start_body=body,
    )


def _reachable(model: RobotModel, limb: str, toe: np.ndarray, body: np.ndarray, shift: ShiftState) -> bool:
    try:
        solve_limb(model, limb, toe, body, shift)
    except KinematicsError:
        return False
    return True


def feasible_body_interval(
    model: RobotModel, limb: str, toe: np.ndarray, body: np.ndarray, shift: ShiftState
) -> Optional[Tuple[float, float]]:
    """Body positions along the climb axis from which ``limb`` reaches ``toe``."""
    base = float(body @ CLIMB_AXIS)
    offsets = np.arange(-_SCAN_HALF_WIDTH_M, _SCAN_HALF_WIDTH_M + 1e-9, _SCAN_STEP_M)

    def ok(y: float) -> bool:
        return _reachable(model, limb, toe, body + (y - base) * CLIMB_AXIS, shift)

    hits = [base + dy for dy in offsets if ok(base + dy)]
    if not hits:
        return None
    lo, hi = min(hits), max(hits)

    def refine(inside: float, outside: float) -> float:
        for _ in range(30):
            mid = 0.5 * (inside + outside)
            if ok(mid):
                inside = mid
            else:
                outside = mid
        return inside

    return refine(lo, lo - _SCAN_STEP_M), refine(hi, hi + _SCAN_STEP_M)


def _body_target(
    model: RobotModel,
    toes: Sequence[Tuple[str, np.ndarray]],
    body: np.ndarray,
    shift: ShiftState,
    preferred: float,
) -> Optional[float]:
    lo, hi = -np.inf, np.inf
    for limb, toe in toes:
        interval = feasible_body_interval(model, limb, toe, body, shift)
        if interval is None:
            return None
        lo, hi = max(lo, interval[0]), min(hi, interval[1])
    if lo > hi:
        return None
    if hi - lo > 2 * _BOUNDARY_MARGIN_M:
        lo, hi = lo + _BOUNDARY_MARGIN_M, hi - _BOUNDARY_MARGIN_M
    return float(np.clip(preferred, lo, hi))


def _shift_candidates(model: RobotModel, current: ShiftState) -> List[ShiftState]:
    angle = model.fourbar.max_angle_rad
    options = [current, ShiftState.neutral()]
    for side in (LiftSide.RIGHT, LiftSide.LEFT):
        options += [ShiftState(side, angle), ShiftState(side, -angle)]
    unique: List[ShiftState] = []
    for option in options:
        if option not in unique:
            unique.append(option)
    return unique


def reachable_holds(
    model: RobotModel, sdm: SparseMap, limb: str, body_position: np.ndarray, shift: Optional[ShiftState] = None
) -> List[str]:
    """Hold ids ``limb`` can reach without moving the body."""
    shift = shift or ShiftState.neutral()
    body = np.asarray(body_position, dtype=float)
    return sorted(h.hold_id for h in sdm.holds.values() if _reachable(model, limb, h.center, body, shift))


def centered_body(model: RobotModel, toes: Mapping[str, np.ndarray], z: float) -> np.ndarray:
    """Body position that puts every toe at its nominal reach."""
    frames = shoulder_frames(model, ShiftState.neutral())
    ys = [toes[l.limb_id][1] - frames[l.limb_id].translation[1] - l.nominal_reach_m for l in model.limbs]
    xs = [toes[l.limb_id][0] - frames[l.limb_id].translation[0] for l in model.limbs]
    return np.array([float(np.mean(xs)), float(np.mean(ys)), z])


def _advance(body: np.ndarray, new_body: np.ndarray, shift: ShiftState, new_shift: ShiftState, toes: Mapping[str, np.ndarray], holds: Mapping[str, str]) -> Phase:
    return Phase(
        kind=PhaseKind.BODY_ADVANCE,
        start_time_s=0.0,
        duration_s=1.0,
        body_start=body,
        body_end=new_body,
        toe_paths={limb: ToePath.hold(toes[limb]) for limb in LIMB_IDS},
        contacts=LIMB_IDS,
        shift_start=shift,
        shift_end=new_shift,
        holds=dict(holds),
    )


def plan_climb_sequence(
    model: RobotModel,
    sdm: SparseMap,
    start_holds: Mapping[str, str],
    goal_holds: Mapping[str, str],
    start_body: Optional[Sequence[float]] = None,
    order: Sequence[str] = DEFAULT_ORDER,
    name: str = "climb",
) -> PhasePlan:
    """Swing each limb to its goal hold, inserting body moves when a target is out of reach."""
    if sorted(order) != sorted(LIMB_IDS):
        raise NoStableOrder(f"swing order {tuple(order)} must name every limb exactly once")
    missing = [limb for limb in LIMB_IDS if limb not in start_holds or limb not in goal_holds]
    if missing:
        raise NoStableOrder(f"no start or goal hold for {missing}")

    toes = {limb: sdm.lookup(start_holds[limb]).center for limb in LIMB_IDS}
    holds = dict(start_holds)
    if start_body is None:
        body = centered_body(model, toes, float(np.mean([t[2] for t in toes.values()])) + model.body_height_m)
    else:
        body = np.asarray(start_body, dtype=float)
    shift = ShiftState.neutral()
    command = GripperCommand(model.timing.climb_release_fraction, model.timing.climb_regrasp_fraction)
    drafts: List[Phase] = []

    for limb in order:
        if goal_holds[limb] == holds[limb]:
            continue
        target = sdm.lookup(goal_holds[limb]).center
        if not _reachable(model, limb, target, body, shift):
            for candidate in _shift_candidates(model, shift):
                # Current toes must stay reachable through the move, and the target after it.
                y = _body_target(model, [*toes.items(), (limb, target)], body, candidate, float(body @ CLIMB_AXIS))
                if y is not None:
                    new_body = body + (y - float(body @ CLIMB_AXIS)) * CLIMB_AXIS
                    drafts.append(_advance(body, new_body, shift, candidate, toes, holds))
                    body, shift = new_body, candidate
                    break
            else:
                raise HoldUnreachable(limb, goal_holds[limb], "no body position or shift reaches it")

        paths = {other: ToePath.hold(toes[other]) for other in LIMB_IDS}
        paths[limb] = ToePath(toes[limb], target, model.timing.swing_clearance_m)
        drafts.append(
            Phase(
                kind=PhaseKind.SWING_LIMB,
                start_time_s=0.0,
                duration_s=1.0,
                body_start=body,
                body_end=body,
                toe_paths=paths,
                contacts=tuple(other for other in LIMB_IDS if other != limb),
                shift_start=shift,
                shift_end=shift,
                holds={k: v for k, v in holds.items() if k != limb},
                gripper_commands={limb: command},
                limb=limb,
            )
        )
        toes[limb] = target
        holds[limb] = goal_holds[limb]

    if drafts:
        center = centered_body(model, toes, float(body[2]))
        neutral = ShiftState.neutral()
        y = _body_target(model, list(toes.items()), body, neutral, float(center @ CLIMB_AXIS))
        if y is not None:
            final = body + (y - float(body @ CLIMB_AXIS)) * CLIMB_AXIS
            if np.linalg.norm(final - body) > 1e-9 or shift != neutral:
                drafts.append(_advance(body, final, shift, neutral, toes, holds))

    plan = PhasePlan(chain_phases(model, drafts), model.configuration, name)
    logger.info("climb plan: %d phases, %.1f s", len(plan), plan.duration_s)
    return plan
