"""Robot model parameters, runtime settings and the package error root."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings

LIMB_IDS: Tuple[str, ...] = ("FR", "FL", "BR", "BL")
FRONT_LIMBS: Tuple[str, ...] = ("FR", "FL")
RIGHT_LIMBS: Tuple[str, ...] = ("FR", "BR")

# Tight tolerances for the convex programs in mapping and stability.
SOLVER_OPTIONS: Dict[str, Dict[str, float]] = {
    "CLARABEL": {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10, "max_iter": 500},
    "SCS": {"eps_abs": 1e-9, "eps_rel": 1e-9, "max_iters": 50_000},
}


class QuadclimbError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(QuadclimbError):
    """A model, scenario or planner request is inconsistent."""


class _Frozen(BaseModel):
    model_config = {"frozen": True, "extra": "forbid"}


class FiveBarParams(_Frozen):
    """Link lengths of the parallel five-bar shared by every limb.

    The back chain is slightly shorter than the front one so the
    configuration-space singular set moves out of the nominal workspace.
    """

    front_upper_m: float = Field(default=0.20, gt=0)
    front_lower_m: float = Field(default=0.30, gt=0)
    back_upper_m: float = Field(default=0.19, gt=0)
    back_lower_m: float = Field(default=0.30, gt=0)
    motor_axis_offset_m: float = Field(default=0.0, ge=0)
    branch: Literal["elbow_out", "elbow_in"] = "elbow_out"
    nominal_point_m: Tuple[float, float] = (0.32, 0.0)
    operating_box_m: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.10, 0.40), (-0.10, 0.10))

    @property
    def is_symmetric(self) -> bool:
        return (
            math.isclose(self.front_upper_m, self.back_upper_m)
            and math.isclose(self.front_lower_m, self.back_lower_m)
        )


class JointLimits(_Frozen):
    """Per-joint limits ordered shoulder, five-bar front, five-bar back, wrist 1-3."""

    lower_rad: Tuple[float, ...] = (-1.2, -0.5, -2.5, -math.pi, 0.0, -math.pi)
    upper_rad: Tuple[float, ...] = (1.2, 2.5, 0.5, math.pi, math.pi, math.pi)
    velocity_rad_s: Tuple[float, ...] = (8.0, 8.0, 8.0, 8.0, 8.0, 8.0)
    # Clustered pairs double the per-motor stall torque on the first three joints.
    torque_nm: Tuple[float, ...] = (8.2, 8.2, 8.2, 4.1, 4.1, 4.1)

    @model_validator(mode="after")
    def _check_shapes(self) -> "JointLimits":
        sizes = {len(self.lower_rad), len(self.upper_rad), len(self.velocity_rad_s), len(self.torque_nm)}
        if sizes != {6}:
            raise ValueError("joint limit tuples must all have six entries")
        if any(lo > hi for lo, hi in zip(self.lower_rad, self.upper_rad)):
            raise ValueError("lower joint limit exceeds upper limit")
        return self


class WristParams(_Frozen):
    toe_offset_m: float = Field(default=0.03, ge=0)
    walking_foot_offset_m: float = Field(default=0.02, ge=0)
    gimbal_tolerance: float = Field(default=1e-3, gt=0)


class FourBarParams(_Frozen):
    """Body posture linkage: a parallelogram whose crank swings the lift side."""

    crank_m: float = Field(default=0.06, gt=0)
    rocker_m: float = Field(default=0.06, gt=0)
    coupler_m: float = Field(default=0.24, gt=0)
    ground_m: float = Field(default=0.24, gt=0)
    max_half_stroke_m: float = Field(default=0.0375, gt=0)
    actuator_velocity_rad_s: float = Field(default=4.8, gt=0)
    thrust_n: float = Field(default=30.0, ge=0)

    @model_validator(mode="after")
    def _check_stroke(self) -> "FourBarParams":
        if self.max_half_stroke_m >= self.crank_m:
            raise ValueError("half stroke must be shorter than the crank")
        return self

    @property
    def max_angle_rad(self) -> float:
        return math.asin(self.max_half_stroke_m / self.crank_m)

    @property
    def stroke_m(self) -> float:
        """Body advance per lift at full crank sweep."""
        return 2.0 * self.max_half_stroke_m


class GoatParams(_Frozen):
    """Two-finger gripper on a translating whippletree.

    Each finger is a straight bar pivoting at ``pivot_half_span_m`` from the
    centerline; its lower end is a slot the actuator pin rides in.
    A nonzero ``carriage_stiffness_n_per_m`` centers the whippletree carriage
    with a spring; zero lets it float.
    """

    pivot_half_span_m: float = Field(default=0.015, gt=0)
    finger_length_m: float = Field(default=0.05, gt=0)
    return_spring_nm_per_rad: float = Field(default=0.02, ge=0)
    min_opening_m: float = Field(default=0.04, gt=0)
    max_opening_m: float = Field(default=0.10, gt=0)
    nominal_opening_m: float = Field(default=0.06, gt=0)
    nominal_fingertip_force_n: float = Field(default=70.0, gt=0)
    boost_factor: float = Field(default=1.6, ge=1.0)
    lateral_travel_m: float = Field(default=0.015, ge=0)
    carriage_stiffness_n_per_m: float = Field(default=0.0, ge=0)
    full_stroke_time_s: float = Field(default=8.0, gt=0)
    cells_per_gripper: int = Field(default=2, ge=1)

    @model_validator(mode="after")
    def _check_openings(self) -> "GoatParams":
        if not self.min_opening_m < self.nominal_opening_m < self.max_opening_m:
            raise ValueError("nominal opening must lie strictly inside the opening range")
        lowest = 2.0 * self.pivot_half_span_m
        highest = 2.0 * (self.pivot_half_span_m + self.finger_length_m)
        if self.min_opening_m <= lowest or self.max_opening_m >= highest:
            raise ValueError("opening range is outside the finger geometry")
        return self


class SpineCellParams(_Frozen):
    spines_per_cell: int = Field(default=50, ge=1)
    spine_diameter_mm: float = Field(default=0.93, gt=0)
    per_spine_shear_n: float = Field(default=2.0, gt=0)
    engagement_scale_n: float = Field(default=35.0, gt=0)
    spine_spring_rate_n_per_m: float = Field(default=5.0, gt=0)


class GraspBoundParams(_Frozen):
    """Linear pull-off capacity over hold slope, plus contact caps.

    Defaults hold the 1.2 safety margin over the measured capacities: the
    intercept carries 13 kg on a vertical wall at the worst three-contact
    pull (1.4 body weights), the 90 deg value carries 9.6 kg on a ceiling
    at half a body weight per gripper.
    """

    intercept_n: float = 214.2
    slope_n_per_deg: float = -1.753
    slope_min_deg: float = 0.0
    slope_max_deg: float = 90.0
    compression_cap_n: float = Field(default=500.0, gt=0)
    foot_friction: float = Field(default=0.6, ge=0)


class ControlParams(_Frozen):
    """Controller rates and gains. Admittance gains are synthetic, tuned so
    force tracking breaks down near 10 Hz on the backlash plant."""

    command_rate_hz: float = Field(default=150.0, gt=0)
    sensor_rate_hz: float = Field(default=400.0, gt=0)
    plant_substeps: int = Field(default=10, ge=1)
    admittance_mass_kg: float = Field(default=1.0, gt=0)
    admittance_damping_ns_per_m: float = Field(default=650.0, ge=0)
    admittance_stiffness_n_per_m: float = Field(default=600.0, ge=0)
    position_gain_per_s: float = Field(default=100.0, gt=0)
    toe_velocity_limit_m_s: float = Field(default=0.5, gt=0)
    contact_stiffness_n_per_m: float = Field(default=10_000.0, gt=0)
    contact_damping_ns_per_m: float = Field(default=100.0, ge=0)
    backlash_m: float = Field(default=0.001, ge=0)
    sag_gain_m_per_mps2: float = Field(default=5.0e-4, ge=0)


class TimingParams(_Frozen):
    settle_s: float = Field(default=0.5, ge=0)
    skate_release_fraction: float = Field(default=0.75, ge=0, le=1)
    skate_regrasp_fraction: float = Field(default=0.75, ge=0, le=1)
    climb_release_fraction: float = Field(default=0.8, ge=0, le=1)
    climb_regrasp_fraction: float = Field(default=0.8, ge=0, le=1)
    swing_clearance_m: float = Field(default=0.03, ge=0)


class LimbParams(_Frozen):
    """Shoulder placement in the body frame and the nominal toe reach."""

    limb_id: Literal["FR", "FL", "BR", "BL"]
    shoulder_x_m: float
    shoulder_y_m: float
    nominal_reach_m: float

    @property
    def is_front(self) -> bool:
        return self.limb_id in FRONT_LIMBS

    @property
    def is_right(self) -> bool:
        return self.limb_id in RIGHT_LIMBS


def _default_limbs() -> Tuple[LimbParams, ...]:
    return (
        LimbParams(limb_id="FR", shoulder_x_m=0.12, shoulder_y_m=0.15, nominal_reach_m=0.05),
        LimbParams(limb_id="FL", shoulder_x_m=-0.12, shoulder_y_m=0.15, nominal_reach_m=0.05),
        LimbParams(limb_id="BR", shoulder_x_m=0.12, shoulder_y_m=-0.15, nominal_reach_m=-0.05),
        LimbParams(limb_id="BL", shoulder_x_m=-0.12, shoulder_y_m=-0.15, nominal_reach_m=-0.05),
    )


class RobotModel(_Frozen):
    """Everything the kinematics, planners and force solver need to know."""

    configuration: Literal["walking_3dof", "climbing_6dof"] = "climbing_6dof"
    limbs: Tuple[LimbParams, ...] = Field(default_factory=_default_limbs)
    fivebar: FiveBarParams = Field(default_factory=FiveBarParams)
    limits: JointLimits = Field(default_factory=JointLimits)
    wrist: WristParams = Field(default_factory=WristParams)
    fourbar: FourBarParams = Field(default_factory=FourBarParams)
    goat: GoatParams = Field(default_factory=GoatParams)
    spines: SpineCellParams = Field(default_factory=SpineCellParams)
    grasp_bound: GraspBoundParams = Field(default_factory=GraspBoundParams)
    control: ControlParams = Field(default_factory=ControlParams)
    timing: TimingParams = Field(default_factory=TimingParams)
    walking_mass_kg: float = Field(default=6.3, gt=0)
    climbing_mass_kg: float = Field(default=9.6, gt=0)
    walking_body_length_m: float = Field(default=0.30, gt=0)
    climbing_body_length_m: float = Field(default=0.35, gt=0)
    manipulability_threshold: float = Field(default=1e-4, gt=0)
    metadata: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_limbs(self) -> "RobotModel":
        ids = tuple(limb.limb_id for limb in self.limbs)
        if sorted(ids) != sorted(LIMB_IDS):
            raise ValueError(f"model needs exactly one limb per id {LIMB_IDS}, got {ids}")
        return self

    @property
    def is_climbing(self) -> bool:
        return self.configuration == "climbing_6dof"

    @property
    def dof_per_limb(self) -> int:
        return 6 if self.is_climbing else 3

    @property
    def mass_kg(self) -> float:
        return self.climbing_mass_kg if self.is_climbing else self.walking_mass_kg

    @property
    def body_length_m(self) -> float:
        return self.climbing_body_length_m if self.is_climbing else self.walking_body_length_m

    @property
    def distal_offset_m(self) -> float:
        """Distance from the five-bar output point to the contact point."""
        return self.wrist.toe_offset_m if self.is_climbing else self.wrist.walking_foot_offset_m

    @property
    def body_height_m(self) -> float:
        return self.fivebar.nominal_point_m[0] + self.distal_offset_m

    def limb(self, limb_id: str) -> LimbParams:
        for limb in self.limbs:
            if limb.limb_id == limb_id:
                return limb
        raise ConfigurationError(f"Unknown limb id: {limb_id}")

    def with_configuration(self, configuration: str) -> "RobotModel":
        return self.model_copy(update={"configuration": configuration})


def default_model(configuration: str = "climbing_6dof") -> RobotModel:
    """Reference model. Link geometry is synthetic; masses and lengths are measured."""
    return RobotModel(
        configuration=configuration,
        metadata={
            "geometry": "synthetic",
            "note": "link lengths, offsets and limits are plausible placeholders",
        },
    )


def save_model(model: RobotModel, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")


def load_model(path: Path) -> RobotModel:
    try:
        return RobotModel.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValueError as e:
        raise ConfigurationError(f"Invalid robot model file {path}: {e}") from e


class QuadclimbSettings(BaseSettings):
    """Runtime settings loaded from environment variables or ``.env``."""

    output_dir: Path = Field(default=Path("./out"), description="Where run artifacts are written")
    seed: int = Field(default=0, description="Seed for stochastic map generation")
    solver: str = Field(default="CLARABEL", description="cvxpy solver name")
    log_level: str = Field(default="INFO", description="Root log level")
    jobs: int = Field(default=1, ge=1, le=32, description="Parallel scenario runs")
    association_radius_m: float = Field(default=0.05, gt=0, description="Hold fusion radius")
    model_file: Optional[Path] = Field(default=None, description="Robot model JSON override")

    model_config = {
        "env_prefix": "QUADCLIMB_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }


def load_settings() -> QuadclimbSettings:
    """Load settings, reading ``.env`` first."""
    from dotenv import load_dotenv
    load_dotenv()
    return QuadclimbSettings()


def resolve_model(settings: Optional[QuadclimbSettings] = None, path: Optional[Path] = None) -> RobotModel:
    """Model from an explicit path, the settings override, or the default."""
    chosen = path or (settings.model_file if settings else None)
    return load_model(chosen) if chosen else default_model()
