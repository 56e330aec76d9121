"""Timed phase plans for climbing, SKATE and trotting, plus their metrics."""

from .base import (
    Attachment,
    GripperCommand,
    HoldUnreachable,
    NoStableOrder,
    Phase,
    PhaseKind,
    PhasePlan,
    PlanningError,
    SpeedInfeasible,
    StanceState,
    StrokeExceeded,
    ToePath,
    nominal_toes,
    quintic,
    replay,
    solve_limb,
    stance_from_toes,
    validate_stance,
)
from .climb import ColumnLayout, feasible_body_interval, make_column_map, plan_climb_sequence, reachable_holds
from .metrics import REFERENCE_TABLE, GaitMetrics, ReferenceRow, compute_metrics, metrics_from_motion
from .skate import plan_skate_cycle, skate_start_toes
from .trot import DIAGONALS, joint_velocity_peak, plan_trot

__all__ = [
    "Attachment",
    "ColumnLayout",
    "DIAGONALS",
    "GaitMetrics",
    "GripperCommand",
    "HoldUnreachable",
    "NoStableOrder",
    "Phase",
    "PhaseKind",
    "PhasePlan",
    "PlanningError",
    "REFERENCE_TABLE",
    "ReferenceRow",
    "SpeedInfeasible",
    "StanceState",
    "StrokeExceeded",
    "ToePath",
    "compute_metrics",
    "feasible_body_interval",
    "joint_velocity_peak",
    "make_column_map",
    "metrics_from_motion",
    "nominal_toes",
    "plan_climb_sequence",
    "plan_skate_cycle",
    "plan_trot",
    "quintic",
    "reachable_holds",
    "replay",
    "skate_start_toes",
    "solve_limb",
    "stance_from_toes",
    "validate_stance",
]
