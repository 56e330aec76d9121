"""Quasi-static contact force distribution, payload capacity, plan certification.

Forces are those the environment applies to the robot, in the world frame.
A contact's normal points out of the surface, so a negative normal
component is a pull the gripper has to hold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import cvxpy as cp
import numpy as np

from .config import SOLVER_OPTIONS, GraspBoundParams, QuadclimbError, RobotModel
from .geometry import CLIMB_AXIS, WALL_NORMAL, GravityFrame, RigidTransform, skew
from .gripper import gripper_shear_capacity, max_withstanding_force
from .kinematics import KinematicsError, lift_side_center, limb_jacobian, shoulder_frames
from .mapping import SparseMap
from .planners.base import Phase, PhaseKind, PhasePlan, solve_limb

logger = logging.getLogger(__name__)

SOLVER_DEFAULT = "CLARABEL"
# Projected forces may violate a constraint by at most this much.
SLACK_TOLERANCE_N = 1e-9
# Caps are shrunk by this inside the solver programs.
CONSTRAINT_MARGIN_N = 1e-7


class StabilityError(QuadclimbError):
    """Base class for stability failures."""


class Infeasible(StabilityError):
    """No admissible force distribution balances the load."""


class BaselineInfeasible(StabilityError):
    """The stance cannot hold even without payload."""


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(self.force + other.force, self.torque + other.torque)

    @classmethod
    def point_force(cls, force: Sequence[float], point: Sequence[float]) -> "Wrench":
        f = np.asarray(force, dtype=float)
        return cls(f, np.cross(np.asarray(point, dtype=float), f))

    def transformed(self, transform: RigidTransform) -> "Wrench":
        # Torque is about the origin, which moves with the transform.
        force = transform.rotation @ self.force
        torque = transform.rotation @ self.torque + np.cross(transform.translation, force)
        return Wrench(force, torque)


@dataclass(frozen=True)
class ContactSpec:
    """One contact with its admissible force set.

    The set is ``-pull_cap <= f_n <= compression_cap`` and
    ``|f_t| <= shear_cap + friction * f_n``.
    """

    position: np.ndarray
    normal: np.ndarray
    pull_cap_n: float
    shear_cap_n: float
    compression_cap_n: float = 500.0
    friction: float = 0.0
    surface_slope_deg: float = 0.0
    preload_n: float = 0.0
    limb: Optional[str] = None

    def __post_init__(self) -> None:
        normal = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", normal / np.linalg.norm(normal))
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))

    @property
    def tangents(self) -> np.ndarray:
        """2x3 orthonormal tangent basis."""
        helper = np.array([1.0, 0.0, 0.0]) if abs(self.normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        t1 = np.cross(self.normal, helper)
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(self.normal, t1)
        return np.vstack([t1, t2])

    @classmethod
    def grasp(
        cls,
        model: RobotModel,
        position: Sequence[float],
        normal: Sequence[float],
        surface_slope_deg: float,
        preload_n: Optional[float] = None,
        limb: Optional[str] = None,
    ) -> "ContactSpec":
        preload = model.goat.nominal_fingertip_force_n if preload_n is None else preload_n
        return cls(
            position=position,
            normal=normal,
            pull_cap_n=max_withstanding_force(model.grasp_bound, surface_slope_deg),
            shear_cap_n=gripper_shear_capacity(model, preload),
            compression_cap_n=model.grasp_bound.compression_cap_n,
            surface_slope_deg=surface_slope_deg,
            preload_n=preload,
            limb=limb,
        )

    @classmethod
    def foot(cls, model: RobotModel, position: Sequence[float], normal: Sequence[float], limb: Optional[str] = None) -> "ContactSpec":
        return cls(
            position=position,
            normal=normal,
            pull_cap_n=0.0,
            shear_cap_n=0.0,
            compression_cap_n=model.grasp_bound.compression_cap_n,
            friction=model.grasp_bound.foot_friction,
            limb=limb,
        )

    def transformed(self, transform: RigidTransform) -> "ContactSpec":
        return ContactSpec(
            position=transform.apply(self.position),
            normal=transform.rotation @ self.normal,
            pull_cap_n=self.pull_cap_n,
            shear_cap_n=self.shear_cap_n,
            compression_cap_n=self.compression_cap_n,
            friction=self.friction,
            surface_slope_deg=self.surface_slope_deg,
            preload_n=self.preload_n,
            limb=self.limb,
        )

    def slack(self, force: np.ndarray) -> float:
        """Smallest constraint slack of ``force``; negative means violated."""
        fn = float(self.normal @ force)
        ft = float(np.linalg.norm(self.tangents @ force))
        return min(
            self.pull_cap_n + fn,
            self.compression_cap_n - fn,
            self.shear_cap_n + self.friction * fn - ft,
        )


@dataclass(frozen=True)
class ContactSolution:
    forces: np.ndarray
    residual_force: np.ndarray
    residual_torque: np.ndarray
    objective: float
    sum_squares: float
    slacks: Tuple[float, ...]

    @property
    def max_force_n(self) -> float:
        return float(np.max(np.linalg.norm(self.forces, axis=1))) if len(self.forces) else 0.0

    @property
    def worst_margin_n(self) -> float:
        return min(self.slacks) if self.slacks else 0.0


def equilibrium_residual(
    contacts: Sequence[ContactSpec], forces: np.ndarray, external: Wrench
) -> Tuple[np.ndarray, np.ndarray]:
    """Net force and net torque about the origin."""
    forces = np.asarray(forces, dtype=float).reshape(len(contacts), 3) if contacts else np.zeros((0, 3))
    net_force = external.force + forces.sum(axis=0)
    net_torque = external.torque.copy()
    for contact, f in zip(contacts, forces):
        net_torque = net_torque + np.cross(contact.position, f)
    return net_force, net_torque


def gravity_wrench(mass_kg: float, gravity: GravityFrame, point: Sequence[float]) -> Wrench:
    return Wrench.point_force(mass_kg * gravity.gravity, point)


def _project_to_equilibrium(contacts: Sequence[ContactSpec], forces: np.ndarray, external: Wrench) -> np.ndarray:
    # Minimal-norm correction that zeroes the residual the solver leaves behind.
    a = np.hstack([np.vstack([np.eye(3), skew(c.position)]) for c in contacts])
    force, torque = equilibrium_residual(contacts, forces, external)
    residual = np.concatenate([force, torque])
    correction = np.linalg.lstsq(a, residual, rcond=None)[0]
    return forces - correction.reshape(-1, 3)


def _solve(problem: cp.Problem, solver: str) -> str:
    try:
        problem.solve(solver=solver, **SOLVER_OPTIONS.get(solver, {}))
    except cp.error.SolverError as e:
        raise Infeasible(f"solver failed: {e}") from e
    return problem.status


def distribute_forces(
    contacts: Sequence[ContactSpec],
    external: Wrench,
    thrust_n: float = 0.0,
    thrust_point: Optional[Sequence[float]] = None,
    thrust_direction: Sequence[float] = CLIMB_AXIS,
    solver: str = SOLVER_DEFAULT,
) -> ContactSolution:
    """Min-max contact force distribution, ties broken by least squares.

    Raises Infeasible when no admissible distribution exists.
    """
    if len(contacts) < 2:
        raise Infeasible(f"need at least two contacts, got {len(contacts)}")
    if thrust_n:
        point = np.zeros(3) if thrust_point is None else thrust_point
        external = external + Wrench.point_force(thrust_n * np.asarray(thrust_direction, dtype=float), point)

    f = [cp.Variable(3) for _ in contacts]
    balance = [
        sum(f) + external.force == 0,
        sum(skew(c.position) @ fi for c, fi in zip(contacts, f)) + external.torque == 0,
    ]
    admissible = []
    for c, fi in zip(contacts, f):
        fn = c.normal @ fi
        cone_margin = CONSTRAINT_MARGIN_N if c.shear_cap_n > 0 or c.friction > 0 else 0.0
        admissible += [
            fn >= -c.pull_cap_n + CONSTRAINT_MARGIN_N,
            fn <= c.compression_cap_n - CONSTRAINT_MARGIN_N,
            cp.norm(c.tangents @ fi) <= c.shear_cap_n + c.friction * fn - cone_margin,
        ]

    peak = cp.Variable()
    bounded = [cp.norm(fi) <= peak for fi in f]
    first = cp.Problem(cp.Minimize(peak), balance + admissible + bounded)
    status = _solve(first, solver)
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise Infeasible(f"no admissible distribution (status {status})")
    if status == cp.OPTIMAL_INACCURATE:
        logger.warning("min-max stage solved inaccurately; forces are re-checked after projection")
    best = float(peak.value)
    forces = np.array([fi.value for fi in f], dtype=float)

    capped = [cp.norm(fi) <= best * (1 + 1e-9) + 1e-9 for fi in f]
    second = cp.Problem(cp.Minimize(sum(cp.sum_squares(fi) for fi in f)), balance + admissible + capped)
    try:
        if _solve(second, solver) == cp.OPTIMAL:
            forces = np.array([fi.value for fi in f], dtype=float)
        else:
            logger.debug("tie-break stage returned %s; keeping the min-max solution", second.status)
    except Infeasible:
        logger.debug("tie-break stage failed; keeping the min-max solution")

    forces = _project_to_equilibrium(contacts, forces, external)
    slacks = tuple(c.slack(fi) for c, fi in zip(contacts, forces))
    worst = int(np.argmin(slacks))
    if slacks[worst] < -SLACK_TOLERANCE_N:
        name = contacts[worst].limb or f"contact {worst}"
        raise Infeasible(f"{name} violates its force limits by {-slacks[worst]:.2e} N after projection")
    residual_force, residual_torque = equilibrium_residual(contacts, forces, external)
    norms = np.linalg.norm(forces, axis=1)
    return ContactSolution(
        forces=forces,
        residual_force=residual_force,
        residual_torque=residual_torque,
        objective=best,
        sum_squares=float((norms ** 2).sum()),
        slacks=slacks,
    )


def joint_torques(
    model: RobotModel,
    limb_id: str,
    q: Any,
    force_world: np.ndarray,
    shoulder: RigidTransform,
    body_pose: RigidTransform,
) -> np.ndarray:
    """Joint torques holding a toe force, tau = J^T f."""
    jac = limb_jacobian(model, limb_id, q, shoulder)
    force_body = body_pose.rotation.T @ np.asarray(force_world, dtype=float)
    return jac[:3].T @ force_body


def torque_violations(model: RobotModel, limb_id: str, torques: np.ndarray) -> List[str]:
    limits = model.limits.torque_nm
    return [
        f"{limb_id} q{i + 1} {tau:+.2f} N*m exceeds {limits[i]:.2f}"
        for i, tau in enumerate(torques)
        if abs(tau) > limits[i] + 1e-9
    ]


@dataclass(frozen=True)
class LimbPosture:
    """Joint state of an attached limb, for the torque post-check."""

    limb_id: str
    q: Any
    shoulder: RigidTransform
    body_pose: RigidTransform


def check_joint_torques(
    model: RobotModel, postures: Sequence[LimbPosture], forces: np.ndarray
) -> List[str]:
    """Violations of the joint torque limits for a solved distribution."""
    problems: List[str] = []
    for posture, force in zip(postures, forces):
        tau = joint_torques(model, posture.limb_id, posture.q, force, posture.shoulder, posture.body_pose)
        problems += torque_violations(model, posture.limb_id, tau)
    return problems


@dataclass(frozen=True)
class CapacityProblem:
    """A fixed stance under gravity, for payload capacity search."""

    contacts: Tuple[ContactSpec, ...]
    gravity: GravityFrame
    base_mass_kg: float
    com: np.ndarray
    payload_point: Optional[np.ndarray] = None
    thrust_n: float = 0.0
    thrust_point: Optional[np.ndarray] = None
    model: Optional[RobotModel] = None
    postures: Optional[Tuple[LimbPosture, ...]] = None
    solver: str = SOLVER_DEFAULT

    def is_feasible(self, payload_kg: float) -> bool:
        load = gravity_wrench(self.base_mass_kg, self.gravity, self.com)
        point = self.com if self.payload_point is None else self.payload_point
        load = load + gravity_wrench(payload_kg, self.gravity, point)
        try:
            solution = distribute_forces(
                self.contacts,
                load,
                thrust_n=self.thrust_n,
                thrust_point=self.com if self.thrust_point is None else self.thrust_point,
                solver=self.solver,
            )
        except Infeasible:
            return False
        if self.model is not None and self.postures:
            return not check_joint_torques(self.model, self.postures, solution.forces)
        return True


def max_payload(
    problem: CapacityProblem, tolerance_kg: float = 0.01, ceiling_kg: float = 1000.0
) -> float:
    """Largest payload the stance holds, by bisection on feasibility."""
    if not problem.is_feasible(0.0):
        raise BaselineInfeasible("stance is infeasible without payload")
    lo, hi = 0.0, 1.0
    while problem.is_feasible(hi):
        lo, hi = hi, 2.0 * hi
        if hi > ceiling_kg:
            logger.warning("payload search hit the %.0f kg ceiling", ceiling_kg)
            return ceiling_kg
    while hi - lo > tolerance_kg:
        mid = 0.5 * (lo + hi)
        if problem.is_feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class PhaseFeasibility:
    label: str
    start_time_s: float
    duration_s: float
    feasible: bool
    first_infeasible_s: Optional[float] = None
    worst_margin_n: float = float("inf")
    max_force_n: float = 0.0
    torque_violations: Tuple[str, ...] = ()
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "start_time_s": self.start_time_s,
            "duration_s": self.duration_s,
            "feasible": self.feasible,
            "first_infeasible_s": self.first_infeasible_s,
            "worst_margin_n": None if np.isinf(self.worst_margin_n) else self.worst_margin_n,
            "max_force_n": self.max_force_n,
            "torque_violations": list(self.torque_violations),
            "message": self.message,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    phases: Tuple[PhaseFeasibility, ...]
    payload_kg: float
    wall_inclination_deg: float

    @property
    def feasible(self) -> bool:
        return all(p.feasible for p in self.phases)

    @property
    def torque_ok(self) -> bool:
        return not any(p.torque_violations for p in self.phases)

    @property
    def first_failure(self) -> Optional[PhaseFeasibility]:
        return next((p for p in self.phases if not p.feasible), None)

    @property
    def worst_margin_n(self) -> float:
        margins = [p.worst_margin_n for p in self.phases if not np.isinf(p.worst_margin_n)]
        return min(margins) if margins else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feasible": self.feasible,
            "torque_ok": self.torque_ok,
            "payload_kg": self.payload_kg,
            "wall_inclination_deg": self.wall_inclination_deg,
            "worst_margin_n": self.worst_margin_n,
            "phases": [p.to_dict() for p in self.phases],
        }


def contact_slope(
    gravity: GravityFrame, hold_slope_deg: Optional[float] = None, bound: Optional[GraspBoundParams] = None
) -> float:
    """Slope seen by the gripper: the hold's own slope plus an overhang term.

    Past vertical the overhang adds ``reach * (1 - cos(overhang))``, where
    ``reach`` is the slope at which the bound falls to zero. The pull-off
    capacity then scales with the cosine of the overhang and never rises
    again as the wall tips toward a ceiling.
    """
    bound = bound or GraspBoundParams()
    overhang = math.radians(min(max(0.0, gravity.wall_inclination_deg - 90.0), 90.0))
    reach = bound.intercept_n / -bound.slope_n_per_deg if bound.slope_n_per_deg < 0 else 90.0
    slope = (hold_slope_deg or 0.0) + reach * (1.0 - math.cos(overhang))
    return float(np.clip(slope, bound.slope_min_deg, bound.slope_max_deg))


def stance_contacts(
    model: RobotModel,
    toes: Mapping[str, np.ndarray],
    gravity: GravityFrame,
    sdm: Optional[SparseMap] = None,
    holds: Optional[Mapping[str, Optional[str]]] = None,
) -> Tuple[ContactSpec, ...]:
    """Contact set for attached toes: grippers when climbing, feet when walking."""
    normal = sdm.wall_normal if sdm is not None else WALL_NORMAL
    holds = holds or {}
    contacts = []
    for limb, toe in toes.items():
        if not model.is_climbing:
            contacts.append(ContactSpec.foot(model, toe, normal, limb))
            continue
        hold_id = holds.get(limb)
        hold_slope = sdm.holds[hold_id].surface_slope_deg if sdm is not None and hold_id in sdm.holds else None
        contacts.append(ContactSpec.grasp(model, toe, normal, contact_slope(gravity, hold_slope, model.grasp_bound), limb=limb))
    return tuple(contacts)


def _instants(phase: Phase, samples: int) -> np.ndarray:
    if phase.kind is PhaseKind.TROT_PAIR:
        return np.array([phase.start_time_s + 0.5 * phase.duration_s])
    return phase.start_time_s + np.linspace(0.0, 1.0, max(samples, 1)) * phase.duration_s


def certify_plan(
    plan: PhasePlan,
    model: RobotModel,
    gravity: GravityFrame,
    sdm: Optional[SparseMap] = None,
    payload_kg: float = 0.0,
    samples_per_phase: int = 3,
    solver: str = SOLVER_DEFAULT,
) -> FeasibilityReport:
    """Solve the force distribution at sampled instants of every phase.

    Failures are recorded in the report; nothing is raised.
    """
    results: List[PhaseFeasibility] = []
    for phase in plan:
        worst, peak = float("inf"), 0.0
        first_bad: Optional[float] = None
        message = ""
        violations: List[str] = []
        for t in _instants(phase, samples_per_phase):
            body = phase.body_position(t)
            shift = phase.shift_at(t)
            toes = {limb: phase.toe_position(limb, t) for limb in phase.contacts}
            contacts = stance_contacts(model, toes, gravity, sdm, phase.holds)
            load = gravity_wrench(model.mass_kg + payload_kg, gravity, body)
            thrust = model.fourbar.thrust_n if phase.lifting else 0.0
            try:
                postures = tuple(
                    LimbPosture(
                        limb,
                        solve_limb(model, limb, toe, body, shift, check_singularity=False),
                        shoulder_frames(model, shift)[limb],
                        RigidTransform.from_translation(body),
                    )
                    for limb, toe in toes.items()
                )
                solution = distribute_forces(
                    contacts, load, thrust_n=thrust, thrust_point=body + lift_side_center(model, shift), solver=solver
                )
            except (Infeasible, KinematicsError) as e:
                first_bad = float(t) if first_bad is None else first_bad
                message = message or str(e)
                continue
            worst = min(worst, solution.worst_margin_n)
            peak = max(peak, solution.max_force_n)
            for problem in check_joint_torques(model, postures, solution.forces):
                if problem not in violations:
                    violations.append(problem)
        results.append(
            PhaseFeasibility(
                label=phase.label,
                start_time_s=phase.start_time_s,
                duration_s=phase.duration_s,
                feasible=first_bad is None,
                first_infeasible_s=first_bad,
                worst_margin_n=worst,
                max_force_n=peak,
                torque_violations=tuple(violations),
                message=message,
            )
        )
        if first_bad is not None:
            logger.info("%s infeasible at t=%.2f s: %s", phase.label, first_bad, message)
    return FeasibilityReport(tuple(results), payload_kg, gravity.wall_inclination_deg)
