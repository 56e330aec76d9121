"""Planar five-bar closure, inverse, and Jacobian.

Planar coordinates are ``(p0, p1)``: ``p0`` points from the shoulder toward
the wall and ``p1`` points forward along the limb's sagittal plane. Motor
angles are measured from ``p0`` toward ``p1``, so an upper link at angle
``q`` ends at ``a * (cos q, sin q)``.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Tuple

import numpy as np

from ..config import FiveBarParams, QuadclimbError

_CLOSURE_EPS = 1e-12
SINGULAR_TOLERANCE = 1e-6


class KinematicsError(QuadclimbError):
    """Base class for kinematic failures."""


class ClosureInfeasible(KinematicsError):
    """The two distal links cannot meet."""


class Unreachable(KinematicsError):
    """The requested target lies outside the limb workspace."""


class NearSingular(KinematicsError):
    """The requested configuration is too close to a singularity."""


class WristGimbalLock(KinematicsError):
    """The outer wrist axes align and the decomposition is not unique."""


class JointLimitViolation(Unreachable):
    """A solved joint angle falls outside its limits."""

    def __init__(self, joint: int, value: float, lower: float, upper: float):
        self.joint = joint
        self.value = value
        super().__init__(f"q{joint + 1}={value:.4f} rad outside [{lower:.4f}, {upper:.4f}]")


class Branch(str, Enum):
    """Assembly branch of the five-bar.

    ``ELBOW_OUT`` places the front elbow ahead of the back elbow with the
    output point on the far side of the elbow chord.
    """

    ELBOW_OUT = "elbow_out"
    ELBOW_IN = "elbow_in"

    @property
    def sign(self) -> float:
        return 1.0 if self is Branch.ELBOW_OUT else -1.0


def _motor_centers(p: FiveBarParams) -> Tuple[np.ndarray, np.ndarray]:
    half = 0.5 * p.motor_axis_offset_m
    return np.array([0.0, half]), np.array([0.0, -half])


def elbow_points(p: FiveBarParams, q2: float, q3: float) -> Tuple[np.ndarray, np.ndarray]:
    """Front and back elbow positions for motor angles ``q2`` and ``q3``."""
    m_front, m_back = _motor_centers(p)
    front = m_front + p.front_upper_m * np.array([math.cos(q2), math.sin(q2)])
    back = m_back + p.back_upper_m * np.array([math.cos(q3), math.sin(q3)])
    return front, back


def fivebar_fk(p: FiveBarParams, q2: float, q3: float, branch: Branch = Branch.ELBOW_OUT) -> np.ndarray:
    """Output point of the five-bar by intersecting the two distal circles."""
    front, back = elbow_points(p, q2, q3)
    chord = back - front
    dist = float(np.linalg.norm(chord))
    if dist < _CLOSURE_EPS:
        raise ClosureInfeasible("elbows coincide; output point is undetermined")
    b1, b2 = p.front_lower_m, p.back_lower_m
    if dist > b1 + b2 + _CLOSURE_EPS or dist < abs(b1 - b2) - _CLOSURE_EPS:
        raise ClosureInfeasible(f"distal circles do not intersect (elbow distance {dist:.6f} m)")

    along = (dist * dist + b1 * b1 - b2 * b2) / (2.0 * dist)
    height = math.sqrt(max(b1 * b1 - along * along, 0.0))
    unit = chord / dist
    normal = np.array([-unit[1], unit[0]])
    return front + along * unit + branch.sign * height * normal


def closure_residual(p: FiveBarParams, q2: float, q3: float, point: np.ndarray) -> float:
    """Largest violation of the two distal link-length constraints."""
    front, back = elbow_points(p, q2, q3)
    return max(
        abs(float(np.linalg.norm(point - front)) - p.front_lower_m),
        abs(float(np.linalg.norm(point - back)) - p.back_lower_m),
    )


def _chain_angle(upper: float, lower: float, center: np.ndarray, point: np.ndarray) -> Tuple[float, float]:
    offset = point - center
    reach = float(np.linalg.norm(offset))
    if reach < _CLOSURE_EPS:
        raise Unreachable("target coincides with a motor axis")
    cos_alpha = (upper * upper + reach * reach - lower * lower) / (2.0 * upper * reach)
    if cos_alpha > 1.0 + 1e-12 or cos_alpha < -1.0 - 1e-12:
        raise Unreachable(f"target at {reach:.4f} m is outside the chain's annulus")
    return math.atan2(offset[1], offset[0]), math.acos(min(1.0, max(-1.0, cos_alpha)))


def fivebar_ik(p: FiveBarParams, point: np.ndarray, branch: Branch = Branch.ELBOW_OUT) -> Tuple[float, float]:
    """Motor angles placing the output at ``point`` on the given branch."""
    point = np.asarray(point, dtype=float)
    m_front, m_back = _motor_centers(p)
    theta_f, alpha_f = _chain_angle(p.front_upper_m, p.front_lower_m, m_front, point)
    theta_b, alpha_b = _chain_angle(p.back_upper_m, p.back_lower_m, m_back, point)
    s = branch.sign
    return theta_f + s * alpha_f, theta_b - s * alpha_b


def fivebar_jacobian(p: FiveBarParams, q2: float, q3: float, branch: Branch = Branch.ELBOW_OUT) -> np.ndarray:
    """2x2 map from motor rates to output point velocity.

    Raises NearSingular when the elbows coincide or the distal links are
    collinear within SINGULAR_TOLERANCE.
    """
    front, back = elbow_points(p, q2, q3)
    if float(np.linalg.norm(back - front)) < _CLOSURE_EPS:
        raise NearSingular("both elbows coincide; the output point is free to swing")
    point = fivebar_fk(p, q2, q3, branch)
    measure = _collinearity(p, point, front, back)
    if measure < SINGULAR_TOLERANCE:
        raise NearSingular(f"distal links are collinear (measure {measure:.2e})")
    d_front = p.front_upper_m * np.array([-math.sin(q2), math.cos(q2)])
    d_back = p.back_upper_m * np.array([-math.sin(q3), math.cos(q3)])
    a = np.vstack([point - front, point - back])
    b = np.diag([float((point - front) @ d_front), float((point - back) @ d_back)])
    return np.linalg.solve(a, b)


def _collinearity(p: FiveBarParams, point: np.ndarray, front: np.ndarray, back: np.ndarray) -> float:
    u, v = point - front, point - back
    return abs(float(u[0] * v[1] - u[1] * v[0])) / (p.front_lower_m * p.back_lower_m)


def parallel_singularity_measure(
    p: FiveBarParams, q2: float, q3: float, branch: Branch = Branch.ELBOW_OUT
) -> float:
    """Sine of the angle between the distal links; zero at a parallel singularity."""
    front, back = elbow_points(p, q2, q3)
    if float(np.linalg.norm(back - front)) < _CLOSURE_EPS:
        return 0.0
    try:
        point = fivebar_fk(p, q2, q3, branch)
    except ClosureInfeasible:
        return 0.0
    return _collinearity(p, point, front, back)


def fivebar_manipulability(p: FiveBarParams, q2: float, q3: float, branch: Branch = Branch.ELBOW_OUT) -> float:
    """|det J| of the five-bar; zero where the closure degenerates."""
    try:
        jac = fivebar_jacobian(p, q2, q3, branch)
    except (ClosureInfeasible, NearSingular):
        return 0.0
    return abs(float(np.linalg.det(jac)))


def worst_singularity_measure(p: FiveBarParams, branch: Branch = Branch.ELBOW_OUT, samples: Tuple[int, int] = (31, 21)) -> float:
    """Smallest parallel-singularity measure over the reachable part of the operating box."""
    (lo0, hi0), (lo1, hi1) = p.operating_box_m
    worst = math.inf
    for p0 in np.linspace(lo0, hi0, samples[0]):
        for p1 in np.linspace(lo1, hi1, samples[1]):
            try:
                q2, q3 = fivebar_ik(p, np.array([p0, p1]), branch)
            except Unreachable:
                continue
            worst = min(worst, parallel_singularity_measure(p, q2, q3, branch))
    return worst
