"""Scenario files and the plan, certify, execute, measure pipeline."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .config import QuadclimbError, RobotModel, default_model
from .control import execute_plan
from .geometry import WALL_NORMAL, GravityFrame, RigidTransform
from .gripper import fingertip_force, max_actuator_force
from .kinematics import LiftSide, ShiftState, lift_side_center, shoulder_frames
from .mapping import Hold, SparseMap, load_map
from .planners import (
    PhasePlan,
    compute_metrics,
    make_column_map,
    nominal_toes,
    plan_climb_sequence,
    plan_skate_cycle,
    plan_trot,
    solve_limb,
)
from .stability import (
    CapacityProblem,
    ContactSpec,
    LimbPosture,
    certify_plan,
    contact_slope,
    distribute_forces,
    gravity_wrench,
    max_payload,
    stance_contacts,
)

logger = logging.getLogger(__name__)


class Environment(str, Enum):
    BOULDERING_VERTICAL = "BoulderingVertical"
    SKATE_PAYLOAD_VERTICAL = "SkatePayloadVertical"
    OVERHANG_125 = "Overhang125"
    CEILING = "Ceiling"
    TROT_GROUND = "TrotGround"
    TROT_PAYLOAD_GROUND = "TrotPayloadGround"

    @property
    def walking(self) -> bool:
        return self in (Environment.TROT_GROUND, Environment.TROT_PAYLOAD_GROUND)


DEFAULT_INCLINATION = {
    Environment.BOULDERING_VERTICAL: 90.0,
    Environment.SKATE_PAYLOAD_VERTICAL: 90.0,
    Environment.OVERHANG_125: 125.0,
    Environment.CEILING: 180.0,
    Environment.TROT_GROUND: 0.0,
    Environment.TROT_PAYLOAD_GROUND: 0.0,
}

# Suspended indicator mass carried on the overhang and ceiling runs.
INDICATOR_PAYLOAD_KG = 0.5


class Expectation(BaseModel):
    model_config = {"frozen": True}

    metric: str
    min: Optional[float] = None
    max: Optional[float] = None

    def check(self, value: Optional[float]) -> bool:
        if value is None or not np.isfinite(value):
            return False
        return (self.min is None or value >= self.min) and (self.max is None or value <= self.max)

    def describe(self) -> str:
        lo = "-inf" if self.min is None else f"{self.min:g}"
        hi = "inf" if self.max is None else f"{self.max:g}"
        return f"[{lo}, {hi}]"


class Scenario(BaseModel):
    model_config = {"frozen": True, "extra": "forbid"}

    name: str
    environment: Environment
    wall_inclination_deg: Optional[float] = Field(default=None, ge=0, le=180)
    payload_kg: Optional[float] = Field(default=None, ge=0)
    map_file: Optional[Path] = None
    start_holds: Dict[str, str] = Field(default_factory=dict)
    goal_holds: Dict[str, str] = Field(default_factory=dict)
    column_rungs: int = Field(default=4, ge=1)
    map_noise_m: float = Field(default=0.0, ge=0)
    lift_stroke_m: float = Field(default=0.075, ge=0)
    cycles: int = Field(default=1, ge=1)
    speed_m_s: Optional[float] = Field(default=None, gt=0)
    stride_m: float = Field(default=0.15, gt=0)
    duty_factor: float = Field(default=0.5, ge=0.5, lt=1.0)
    seed: int = 0
    simulate_execution: bool = True
    model_overrides: Dict[str, Any] = Field(default_factory=dict)
    expectations: List[Expectation] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_environment_fields(self) -> "Scenario":
        if self.environment.walking and self.speed_m_s is None:
            raise ValueError(f"{self.environment.value} needs speed_m_s")
        if self.map_file is not None and not (self.start_holds and self.goal_holds):
            raise ValueError("a map_file needs start_holds and goal_holds")
        return self

    @property
    def gravity(self) -> GravityFrame:
        inclination = self.wall_inclination_deg
        if inclination is None:
            inclination = DEFAULT_INCLINATION[self.environment]
        return GravityFrame(inclination)

    @property
    def payload(self) -> float:
        if self.payload_kg is not None:
            return self.payload_kg
        if self.environment in (Environment.OVERHANG_125, Environment.CEILING):
            return INDICATOR_PAYLOAD_KG
        return 0.0


class ExpectationResult(BaseModel):
    metric: str
    value: Optional[float]
    expected: str
    passed: bool


class RunReport(BaseModel):
    scenario: str
    environment: str
    seed: int
    payload_kg: float
    wall_inclination_deg: float
    metrics: Dict[str, float] = Field(default_factory=dict)
    feasibility: Dict[str, Any] = Field(default_factory=dict)
    plan_phases: int = 0
    expectations: List[ExpectationResult] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list)
    passed: Optional[bool] = None
    runtime_s: float = 0.0

    def deterministic_json(self) -> str:
        """Report JSON without the wall-clock runtime."""
        return self.model_dump_json(exclude={"runtime_s"}, indent=2)


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def scenario_model(scenario: Scenario, base: Optional[RobotModel] = None) -> RobotModel:
    configuration = "walking_3dof" if scenario.environment.walking else "climbing_6dof"
    model = (base or default_model()).with_configuration(configuration)
    if scenario.model_overrides:
        model = RobotModel.model_validate(_merge(model.model_dump(), scenario.model_overrides))
    return model


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    scenario = Scenario.model_validate_json(path.read_text(encoding="utf-8"))
    if scenario.map_file is not None and not scenario.map_file.is_absolute():
        scenario = scenario.model_copy(update={"map_file": path.parent / scenario.map_file})
    return scenario


def _jittered(sdm: SparseMap, noise_m: float, seed: int) -> SparseMap:
    rng = np.random.default_rng(seed)
    holds: Dict[str, Hold] = {}
    for hold_id in sorted(sdm.holds):
        hold = sdm.holds[hold_id]
        # Keep the depth so holds stay on the wall plane.
        offset = rng.uniform(-noise_m, noise_m, size=3) * np.array([1.0, 1.0, 0.0])
        holds[hold_id] = hold.model_copy(update={"center_m": tuple(hold.center + offset)})
    return sdm.model_copy(update={"holds": holds})


def plan_scenario(scenario: Scenario, model: RobotModel) -> tuple[PhasePlan, Optional[SparseMap]]:
    env = scenario.environment
    if env is Environment.BOULDERING_VERTICAL:
        if scenario.map_file is not None:
            sdm = load_map(scenario.map_file)
            return plan_climb_sequence(model, sdm, scenario.start_holds, scenario.goal_holds, name=scenario.name), sdm
        layout = make_column_map(model, rungs=scenario.column_rungs)
        sdm = _jittered(layout.sdm, scenario.map_noise_m, scenario.seed) if scenario.map_noise_m else layout.sdm
        plan = plan_climb_sequence(model, sdm, layout.start_holds, layout.goal_holds, name=scenario.name)
        return plan, sdm
    if env.walking:
        plan = plan_trot(
            model,
            scenario.speed_m_s,
            stride_m=scenario.stride_m,
            duty_factor=scenario.duty_factor,
            cycles=max(scenario.cycles, 2),
            name=scenario.name,
        )
        return plan, None
    return plan_skate_cycle(model, lift_stroke_m=scenario.lift_stroke_m, cycles=scenario.cycles, name=scenario.name), None


def two_contact_feasible(model: RobotModel, gravity: GravityFrame, payload_kg: float, limbs: Sequence[str] = ("FR", "BL")) -> bool:
    """Diagonal two-gripper stance at nominal reach holds the robot."""
    body = np.zeros(3)
    toes = nominal_toes(model, body, ShiftState.neutral())
    contacts = stance_contacts(model, {limb: toes[limb] for limb in limbs}, gravity)
    try:
        distribute_forces(contacts, gravity_wrench(model.mass_kg + payload_kg, gravity, body))
    except QuadclimbError:
        return False
    return True


def run_scenario(scenario: Scenario, base_model: Optional[RobotModel] = None) -> RunReport:
    """Plan, certify, execute and measure one scenario. Never raises package errors."""
    started = time.perf_counter()
    gravity = scenario.gravity
    payload = scenario.payload
    report = RunReport(
        scenario=scenario.name,
        environment=scenario.environment.value,
        seed=scenario.seed,
        payload_kg=payload,
        wall_inclination_deg=gravity.wall_inclination_deg,
    )
    values: Dict[str, float] = {}
    try:
        model = scenario_model(scenario, base_model)
        plan, sdm = plan_scenario(scenario, model)
        report.plan_phases = len(plan)
        feasibility = certify_plan(plan, model, gravity, sdm=sdm, payload_kg=payload)
        report.feasibility = feasibility.to_dict()
        values.update(compute_metrics(plan, model, payload).to_dict())
        values["feasible"] = float(feasibility.feasible)
        values["torque_ok"] = float(feasibility.torque_ok)
        values["worst_margin_n"] = feasibility.worst_margin_n
        if scenario.environment is Environment.CEILING:
            values["two_contact_feasible"] = float(two_contact_feasible(model, gravity, payload))
        if scenario.simulate_execution:
            execution = execute_plan(model, plan, gravity)
            values["max_joint_error_rad"] = execution.max_joint_error_rad
            values["max_sag_residual_m"] = execution.max_sag_residual_m
    except QuadclimbError as e:
        logger.error("%s failed: %s", scenario.name, e)
        report.errors.append(f"{type(e).__name__}: {e}")
    except ValueError as e:
        report.errors.append(f"{type(e).__name__}: {e}")

    report.metrics = {k: float(v) for k, v in values.items()}
    for expectation in scenario.expectations:
        value = values.get(expectation.metric)
        report.expectations.append(
            ExpectationResult(
                metric=expectation.metric,
                value=None if value is None else float(value),
                expected=expectation.describe(),
                passed=expectation.check(value),
            )
        )
    if report.errors:
        report.passed = False
    elif report.expectations:
        report.passed = all(r.passed for r in report.expectations)
    report.runtime_s = time.perf_counter() - started
    logger.info("%s finished in %.1f s (passed=%s)", scenario.name, report.runtime_s, report.passed)
    return report


def run_scenarios(
    scenarios: Sequence[Scenario],
    jobs: int = 1,
    base_model: Optional[RobotModel] = None,
    on_done: Optional[Callable[[RunReport], None]] = None,
) -> List[RunReport]:
    """Run independently; results come back ordered by scenario name."""
    reports: List[RunReport] = []
    if jobs <= 1 or len(scenarios) <= 1:
        for scenario in scenarios:
            reports.append(run_scenario(scenario, base_model))
            if on_done:
                on_done(reports[-1])
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for report in pool.map(run_scenario, scenarios, [base_model] * len(scenarios)):
                reports.append(report)
                if on_done:
                    on_done(report)
    return sorted(reports, key=lambda r: r.scenario)


def save_report(report: RunReport, out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.scenario}.report.json"
    path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    return path


def load_reports(run_dir: Path) -> List[RunReport]:
    paths = sorted(Path(run_dir).glob("*.report.json"))
    return [RunReport.model_validate(json.loads(p.read_text(encoding="utf-8"))) for p in paths]


class StanceContact(BaseModel):
    model_config = {"frozen": True, "extra": "forbid"}

    limb: str
    position_m: Optional[Tuple[float, float, float]] = None
    surface_slope_deg: Optional[float] = Field(default=None, ge=0, le=90)


class CapacityStance(BaseModel):
    """A fixed stance for payload capacity search, as read from a stance file."""

    model_config = {"frozen": True, "extra": "forbid"}

    configuration: Literal["walking_3dof", "climbing_6dof"] = "climbing_6dof"
    wall_inclination_deg: float = Field(default=90.0, ge=0, le=180)
    thrust_n: float = Field(default=0.0, ge=0)
    lift_side: LiftSide = LiftSide.NEUTRAL
    body_m: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    payload_point_m: Optional[Tuple[float, float, float]] = None
    check_torques: bool = True
    contacts: List[StanceContact] = Field(min_length=2)


class CapacityResult(BaseModel):
    max_payload_kg: float
    boosted_max_payload_kg: Optional[float] = None
    nominal_preload_n: float
    boosted_preload_n: Optional[float] = None


def _capacity_problem(stance: CapacityStance, model: RobotModel, preload_n: Optional[float]) -> CapacityProblem:
    gravity = GravityFrame(stance.wall_inclination_deg)
    body = np.asarray(stance.body_m, dtype=float)
    toes = nominal_toes(model, body, ShiftState.neutral())
    contacts, postures = [], []
    for spec in stance.contacts:
        toe = np.asarray(spec.position_m, dtype=float) if spec.position_m is not None else toes[spec.limb]
        if model.is_climbing:
            slope = contact_slope(gravity, spec.surface_slope_deg, model.grasp_bound)
            contacts.append(ContactSpec.grasp(model, toe, WALL_NORMAL, slope, preload_n=preload_n, limb=spec.limb))
        else:
            contacts.append(ContactSpec.foot(model, toe, WALL_NORMAL, spec.limb))
        if stance.check_torques:
            q = solve_limb(model, spec.limb, toe, body, ShiftState.neutral(), check_singularity=False)
            postures.append(
                LimbPosture(spec.limb, q, shoulder_frames(model, ShiftState.neutral())[spec.limb], RigidTransform.from_translation(body))
            )
    return CapacityProblem(
        contacts=tuple(contacts),
        gravity=gravity,
        base_mass_kg=model.mass_kg,
        com=body,
        payload_point=None if stance.payload_point_m is None else np.asarray(stance.payload_point_m, dtype=float),
        thrust_n=stance.thrust_n,
        thrust_point=body + lift_side_center(model, ShiftState(stance.lift_side)),
        model=model if stance.check_torques else None,
        postures=tuple(postures) if stance.check_torques else None,
    )


def stance_capacity(stance: CapacityStance, base_model: Optional[RobotModel] = None) -> CapacityResult:
    """Max payload at nominal grip and, for climbing stances, at boosted grip."""
    model = (base_model or default_model()).with_configuration(stance.configuration)
    nominal = model.goat.nominal_fingertip_force_n
    result = CapacityResult(
        max_payload_kg=max_payload(_capacity_problem(stance, model, None)),
        nominal_preload_n=nominal if model.is_climbing else 0.0,
    )
    if model.is_climbing:
        boosted = fingertip_force(model.goat, max_actuator_force(model.goat), model.goat.nominal_opening_m)
        result.boosted_preload_n = boosted
        result.boosted_max_payload_kg = max_payload(_capacity_problem(stance, model, boosted))
    return result


def load_stance(path: Path) -> CapacityStance:
    return CapacityStance.model_validate_json(Path(path).read_text(encoding="utf-8"))
