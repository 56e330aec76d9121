"""Two-finger spine gripper: passive adaptation, force transmission, capacity.

Each finger is a straight bar pivoting at ``+/-w`` from the gripper
centerline. Below the pivot the bar is a slot carrying the actuator pin,
which runs along the centerline at depth ``s``. Finger angle ``beta`` is
measured from the approach axis, so ``s = w / tan(beta)`` and the tip sits
at ``w + L sin(beta)`` from the centerline. Pulling the pin deeper closes
the fingers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .config import GoatParams, GraspBoundParams, QuadclimbError, RobotModel, SpineCellParams


class GripperError(QuadclimbError):
    """Base class for gripper model failures."""


class OffsetExceedsTravel(GripperError):
    """Object center lies beyond the passive lateral travel."""


class ObjectTooWide(GripperError):
    """Object is wider than the maximum opening."""


class OpeningOutOfRange(GripperError):
    """Opening outside the linkage range."""


class SlopeOutOfRange(GripperError):
    """Surface slope outside the range the bound was fitted on."""


@dataclass(frozen=True)
class AdaptedGrasp:
    finger_positions_m: Tuple[float, float]
    lateral_shift_m: float
    cell_orientations_rad: Tuple[float, float]
    contact_forces_n: Tuple[float, float]
    finger_angle_rad: float
    bar_arms_m: Tuple[float, float]

    @property
    def bar_moment_nm(self) -> float:
        """Net moment of the finger loads about the bar pivot."""
        return self.contact_forces_n[0] * self.bar_arms_m[0] - self.contact_forces_n[1] * self.bar_arms_m[1]


def finger_angle(g: GoatParams, opening: float) -> float:
    if opening < g.min_opening_m - 1e-12 or opening > g.max_opening_m + 1e-12:
        raise OpeningOutOfRange(
            f"opening {opening:.4f} m outside [{g.min_opening_m:.4f}, {g.max_opening_m:.4f}]"
        )
    return math.asin((0.5 * opening - g.pivot_half_span_m) / g.finger_length_m)


def pin_depth(g: GoatParams, beta: float) -> float:
    return g.pivot_half_span_m / math.tan(beta)


def _pin_rate(g: GoatParams, beta: float) -> float:
    """|ds / dbeta|."""
    return g.pivot_half_span_m / math.sin(beta) ** 2


def _spring_torque(g: GoatParams, beta: float) -> float:
    open_angle = finger_angle(g, g.max_opening_m)
    return g.return_spring_nm_per_rad * (open_angle - beta)


def fingertip_force(g: GoatParams, actuator_force: float, opening: float) -> float:
    """Normal force at each fingertip from static equilibrium, in N."""
    if actuator_force < 0:
        raise GripperError("actuator force must be non-negative")
    beta = finger_angle(g, opening)
    drive = actuator_force * _pin_rate(g, beta) - 2.0 * _spring_torque(g, beta)
    return max(0.0, drive / (2.0 * g.finger_length_m * math.cos(beta)))


def nominal_actuator_force(g: GoatParams) -> float:
    """Actuator force giving the nominal fingertip force at the nominal opening."""
    beta = finger_angle(g, g.nominal_opening_m)
    needed = 2.0 * g.nominal_fingertip_force_n * g.finger_length_m * math.cos(beta)
    return (needed + 2.0 * _spring_torque(g, beta)) / _pin_rate(g, beta)


def max_actuator_force(g: GoatParams) -> float:
    return g.boost_factor * nominal_actuator_force(g)


def _carriage_position(g: GoatParams, offset: float, force: float) -> float:
    # Pivot lag e = offset - carriage unbalances the squeeze by 2 F e / h,
    # which the centering spring takes up: k * carriage = 2 F e / h.
    k = g.carriage_stiffness_n_per_m
    if k == 0.0:
        return offset
    squeeze = 2.0 * force / g.pivot_half_span_m
    return offset * squeeze / (k + squeeze)


def adapt_grasp(
    g: GoatParams,
    object_center_offset: float,
    object_width: float,
    actuator_force: Optional[float] = None,
) -> AdaptedGrasp:
    """Close on an object centered ``object_center_offset`` from the palm axis.

    The fingers close symmetrically about the object. The whippletree bar
    pivots on the carriage, and the bar ends carry the finger slots at
    ``offset +/- h``. Moment balance about the pivot splits the actuator
    load between the fingers by the opposite arm lengths; a carriage held
    back by its centering spring shifts load between the fingers.
    """
    if abs(object_center_offset) > g.lateral_travel_m + 1e-12:
        raise OffsetExceedsTravel(
            f"offset {object_center_offset:.4f} m exceeds travel {g.lateral_travel_m:.4f} m"
        )
    if object_width > g.max_opening_m + 1e-12:
        raise ObjectTooWide(f"width {object_width:.4f} m exceeds opening {g.max_opening_m:.4f} m")
    beta = finger_angle(g, object_width)
    force = fingertip_force(g, actuator_force if actuator_force is not None else nominal_actuator_force(g), object_width)

    carriage = _carriage_position(g, object_center_offset, force)
    lag = carriage - object_center_offset
    left_arm = g.pivot_half_span_m + lag
    right_arm = g.pivot_half_span_m - lag
    if min(left_arm, right_arm) < 0.0:
        raise OffsetExceedsTravel(f"carriage lag {lag:.4f} m exceeds the bar half-length")
    total = left_arm + right_arm
    left_force = 2.0 * force * right_arm / total
    right_force = 2.0 * force * left_arm / total

    half = 0.5 * object_width
    # Parallelogram couplers keep both cells parallel to the palm.
    return AdaptedGrasp(
        finger_positions_m=(object_center_offset - half, object_center_offset + half),
        lateral_shift_m=carriage,
        cell_orientations_rad=(0.0, 0.0),
        contact_forces_n=(left_force, right_force),
        finger_angle_rad=beta,
        bar_arms_m=(left_arm, right_arm),
    )


def fits_opening(g: GoatParams, width: float, offset: float = 0.0) -> bool:
    """True when the gripper can close on an object of this width and offset."""
    return (
        g.min_opening_m <= width <= g.max_opening_m
        and abs(offset) <= g.lateral_travel_m
    )


def max_withstanding_force(b: GraspBoundParams, surface_slope: float) -> float:
    """Pull-off capacity a + b*slope, clamped at zero, in N."""
    if surface_slope < b.slope_min_deg - 1e-9 or surface_slope > b.slope_max_deg + 1e-9:
        raise SlopeOutOfRange(
            f"slope {surface_slope:.2f} deg outside [{b.slope_min_deg}, {b.slope_max_deg}]"
        )
    return max(0.0, b.intercept_n + b.slope_n_per_deg * surface_slope)


def engaged_fraction(sc: SpineCellParams, normal_force: float) -> float:
    if normal_force <= 0:
        return 0.0
    return 1.0 - math.exp(-normal_force / sc.engagement_scale_n)


def spine_shear_capacity(sc: SpineCellParams, normal_force: float) -> float:
    """Tangential capacity of one spine cell under a normal preload, in N."""
    if normal_force < 0:
        raise GripperError("normal force must be non-negative")
    return engaged_fraction(sc, normal_force) * sc.spines_per_cell * sc.per_spine_shear_n


def gripper_shear_capacity(model: RobotModel, preload: float) -> float:
    """All cells of one gripper, each pressed with ``preload``."""
    return model.goat.cells_per_gripper * spine_shear_capacity(model.spines, preload)


def gripper_timing(g: GoatParams, stroke_fraction: float) -> float:
    """Seconds to move the fingers through ``stroke_fraction`` of full travel."""
    if not 0.0 <= stroke_fraction <= 1.0:
        raise GripperError(f"stroke fraction {stroke_fraction} outside [0, 1]")
    return stroke_fraction * g.full_stroke_time_s
