"""Normalized speed, payload and work-capacity metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..config import RobotModel
from .base import PhasePlan


@dataclass(frozen=True)
class GaitMetrics:
    speed_m_s: float
    body_length_m: float
    mass_kg: float
    payload_kg: float = 0.0
    duration_s: float = 0.0
    displacement_m: float = 0.0

    @property
    def speed_m_per_min(self) -> float:
        return self.speed_m_s * 60.0

    @property
    def normalized_speed_per_s(self) -> float:
        return self.speed_m_s / self.body_length_m

    @property
    def normalized_speed_per_min(self) -> float:
        return self.normalized_speed_per_s * 60.0

    @property
    def normalized_payload(self) -> float:
        return self.payload_kg / self.mass_kg

    @property
    def normalized_workload(self) -> float:
        """Normalized speed (per second) times normalized payload."""
        return self.normalized_speed_per_s * self.normalized_payload

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(
            speed_m_per_min=self.speed_m_per_min,
            normalized_speed_per_s=self.normalized_speed_per_s,
            normalized_speed_per_min=self.normalized_speed_per_min,
            normalized_payload=self.normalized_payload,
            normalized_workload=self.normalized_workload,
        )
        return data


def metrics_from_motion(
    displacement_m: float,
    duration_s: float,
    model: RobotModel,
    payload_kg: float = 0.0,
) -> GaitMetrics:
    speed = displacement_m / duration_s if duration_s > 0 else 0.0
    return GaitMetrics(
        speed_m_s=speed,
        body_length_m=model.body_length_m,
        mass_kg=model.mass_kg,
        payload_kg=payload_kg,
        duration_s=duration_s,
        displacement_m=displacement_m,
    )


def compute_metrics(plan: PhasePlan, model: RobotModel, payload_kg: float = 0.0) -> GaitMetrics:
    """Metrics of an executed plan from its net body displacement and duration."""
    displacement = float(np.linalg.norm(plan.body_displacement_m)) if len(plan) else 0.0
    return metrics_from_motion(displacement, plan.duration_s if len(plan) else 0.0, model, payload_kg)


@dataclass(frozen=True)
class ReferenceRow:
    robot: str
    environment: str
    mass_kg: Optional[float] = None
    speed: Optional[float] = None
    speed_unit: str = "m/s"
    normalized_speed: Optional[float] = None
    payload_kg: Optional[float] = None
    normalized_payload: Optional[float] = None
    normalized_workload: Optional[float] = None
    note: str = ""


# Published comparison rows. The walking workload is kept as printed (3.88);
# speed times payload from the same row gives 4.36.
REFERENCE_TABLE: Tuple[ReferenceRow, ...] = (
    ReferenceRow("quadclimb walking", "ground", 6.3, 0.56, "m/s", 1.87, 14.7, 2.33, 3.88, "printed workload"),
    ReferenceRow("quadclimb walking", "ground", 6.3, 0.25, "m/s", 0.83, 10.2, None, None, "practical trot payload"),
    ReferenceRow("quadclimb climbing", "wall", 9.6, 0.35, "m/min", 1.0, None, None, None, "bouldering"),
    ReferenceRow("quadclimb climbing", "wall", 9.6, 0.16, "m/min", None, 3.4, None, None, "SKATE with payload"),
    ReferenceRow("LEMUR 3", "wall", None, 0.0027, "m/min"),
    ReferenceRow("HubRobo", "wall", None, 0.17, "m/min", 0.57),
    ReferenceRow("RiSE", "wall", None, 15.0, "m/min", 40.0, 1.5),
    ReferenceRow("Bobcat", "wall", None, 10.5, "m/min", 22.8),
)

PRINTED_WALKING_WORKLOAD = 3.88
