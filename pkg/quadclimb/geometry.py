"""Rigid transforms and gravity framing shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

STANDARD_GRAVITY = 9.81

# Canonical wall frame: x lateral, y climb axis (up the wall), z wall normal
# pointing out of the wall toward the robot.
CLIMB_AXIS = np.array([0.0, 1.0, 0.0])
WALL_NORMAL = np.array([0.0, 0.0, 1.0])


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def skew(v: Sequence[float]) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation, applied as ``p -> R p + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        rotation = np.array(self.rotation, dtype=float).reshape(3, 3)
        translation = np.array(self.translation, dtype=float).reshape(3)
        if np.linalg.norm(rotation.T @ rotation - np.eye(3)) > 1e-9 or np.linalg.det(rotation) < 0:
            raise ValueError("rotation must be orthonormal with determinant +1")
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_translation(cls, translation: Iterable[float]) -> "RigidTransform":
        return cls(np.eye(3), np.asarray(list(translation), dtype=float))

    @classmethod
    def from_rotvec(cls, rotvec: Iterable[float], translation: Iterable[float] = (0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls(Rotation.from_rotvec(list(rotvec)).as_matrix(), np.asarray(list(translation), dtype=float))

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def rotation_distance(self, other: "RigidTransform") -> float:
        """Geodesic angle between the two orientations (rad)."""
        return float(Rotation.from_matrix(self.rotation.T @ other.rotation).magnitude())

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return compose(self, other)

    def to_dict(self) -> dict:
        return {"rotation": self.rotation.tolist(), "translation_m": self.translation.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "RigidTransform":
        return cls(np.array(data["rotation"]), np.array(data["translation_m"]))


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Return ``a ∘ b``: apply ``b`` first, then ``a``."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


@dataclass(frozen=True)
class GravityFrame:
    """Gravity expressed in the canonical wall frame.

    ``wall_inclination_deg`` is the angle of the climbing surface measured
    from the ground: 0 is the ground (gravity pushes into the surface),
    90 a vertical wall, >90 an overhang and 180 the ceiling (gravity pulls
    straight off the surface).
    """

    wall_inclination_deg: float = 90.0
    magnitude: float = STANDARD_GRAVITY

    def __post_init__(self) -> None:
        if not 0.0 <= self.wall_inclination_deg <= 180.0:
            raise ValueError(f"inclination must lie in [0, 180], got {self.wall_inclination_deg}")
        if self.magnitude <= 0.0:
            raise ValueError("gravity magnitude must be positive")

    @property
    def gravity(self) -> np.ndarray:
        theta = np.radians(self.wall_inclination_deg)
        return self.magnitude * np.array([0.0, -np.sin(theta), -np.cos(theta)])

    @property
    def tangential_magnitude(self) -> float:
        """Gravity component lying in the wall plane."""
        g = self.gravity
        return float(np.linalg.norm(g - np.dot(g, WALL_NORMAL) * WALL_NORMAL))

    @property
    def normal_component(self) -> float:
        """Signed gravity along the outward wall normal (negative pushes into the wall)."""
        return float(np.dot(self.gravity, WALL_NORMAL))

    @classmethod
    def ground(cls) -> "GravityFrame":
        return cls(0.0)

    @classmethod
    def vertical(cls) -> "GravityFrame":
        return cls(90.0)

    @classmethod
    def ceiling(cls) -> "GravityFrame":
        return cls(180.0)
