"""Sparse discrete map: holds as ellipsoids, walls as planes."""

from __future__ import annotations

import json
import logging
import math
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ..config import GoatParams
from ..geometry import WALL_NORMAL
from .ellipsoid import EllipsoidFit, MappingError, WallPlane, fit_plane, inscribe_ellipsoid

logger = logging.getLogger(__name__)

_NUMBERED_ID = re.compile(r"H(\d+)")

MAP_VERSION = 1
Vec3 = Tuple[float, float, float]


class Hold(BaseModel):
    """One fused hold. Variance is the per-axis RMS spread of observed centers."""

    model_config = {"frozen": True}

    hold_id: str
    center_m: Vec3
    semi_axes_m: Vec3
    orientation: Tuple[Vec3, Vec3, Vec3]
    centroid_variance_m: float = 0.0
    surface_slope_deg: float = 0.0
    observations: int = 1
    center_sq_dev_m2: float = Field(default=0.0, description="Welford sum of squared center deviations")

    @property
    def center(self) -> np.ndarray:
        return np.array(self.center_m)

    @property
    def semi_axes(self) -> np.ndarray:
        return np.array(self.semi_axes_m)

    @property
    def rotation(self) -> np.ndarray:
        return np.array(self.orientation)

    @property
    def normal(self) -> np.ndarray:
        return WALL_NORMAL.copy()

    @property
    def slope_deg(self) -> float:
        return self.surface_slope_deg


class PlaneRecord(BaseModel):
    model_config = {"frozen": True}

    normal: Vec3
    offset_m: float
    rms_m: float

    def to_plane(self) -> WallPlane:
        return WallPlane(np.array(self.normal), self.offset_m, self.rms_m)


class SparseMap(BaseModel):
    model_config = {"frozen": True}

    version: int = MAP_VERSION
    frame_id: str = "world"
    holds: Dict[str, Hold] = Field(default_factory=dict)
    planes: List[PlaneRecord] = Field(default_factory=list)

    def lookup(self, hold_id: str) -> Hold:
        try:
            return self.holds[hold_id]
        except KeyError:
            raise MappingError(f"Unknown hold id: {hold_id}") from None

    @property
    def wall_normal(self) -> np.ndarray:
        return np.array(self.planes[0].normal) if self.planes else WALL_NORMAL.copy()

    def nearest(self, point: np.ndarray) -> Optional[Tuple[Hold, float]]:
        if not self.holds:
            return None
        point = np.asarray(point, dtype=float)
        best = min(self.holds.values(), key=lambda h: float(np.linalg.norm(h.center - point)))
        return best, float(np.linalg.norm(best.center - point))

    def holds_within(self, point: np.ndarray, radius_m: float) -> List[Hold]:
        point = np.asarray(point, dtype=float)
        found = [h for h in self.holds.values() if np.linalg.norm(h.center - point) <= radius_m]
        return sorted(found, key=lambda h: float(np.linalg.norm(h.center - point)))

    def next_hold_id(self) -> str:
        """``H`` plus one past the largest numbered id in the map."""
        numbers = [int(m.group(1)) for m in map(_NUMBERED_ID.fullmatch, self.holds) if m]
        return f"H{max(numbers, default=0) + 1:03d}"

    def with_hold(self, hold: Hold) -> "SparseMap":
        holds = dict(self.holds)
        holds[hold.hold_id] = hold
        return self.model_copy(update={"holds": holds})

    def with_plane(self, plane: WallPlane) -> "SparseMap":
        record = PlaneRecord(normal=tuple(plane.normal), offset_m=plane.offset, rms_m=plane.rms)
        return self.model_copy(update={"planes": [*self.planes, record]})


def surface_slope(orientation: np.ndarray, wall_normal: np.ndarray = WALL_NORMAL) -> float:
    """Angle between the hold's grasp face (smallest axis) and the wall, in degrees."""
    smallest = np.asarray(orientation)[:, 2]
    cosine = abs(float(smallest @ wall_normal)) / float(np.linalg.norm(wall_normal))
    return math.degrees(math.acos(min(1.0, cosine)))


def hold_from_fit(hold_id: str, fit: EllipsoidFit, wall_normal: np.ndarray = WALL_NORMAL, slope_override: Optional[float] = None) -> Hold:
    slope = surface_slope(fit.orientation, wall_normal) if slope_override is None else slope_override
    return Hold(
        hold_id=hold_id,
        center_m=tuple(fit.center),
        semi_axes_m=tuple(fit.semi_axes),
        orientation=tuple(tuple(row) for row in fit.orientation),
        surface_slope_deg=slope,
    )


def fuse_observation(sdm: SparseMap, observed: Hold, association_radius_m: float = 0.05) -> SparseMap:
    """Merge an observation into the nearest hold, or add it as a new one."""
    match = sdm.nearest(observed.center)
    if match is None or match[1] >= association_radius_m:
        new_id = observed.hold_id if observed.hold_id not in sdm.holds else sdm.next_hold_id()
        logger.debug("new hold %s at %s", new_id, np.round(observed.center, 4))
        return sdm.with_hold(observed.model_copy(update={"hold_id": new_id, "observations": 1, "center_sq_dev_m2": 0.0, "centroid_variance_m": 0.0}))

    hold = match[0]
    n = hold.observations + 1
    delta = observed.center - hold.center
    center = hold.center + delta / n
    sq_dev = hold.center_sq_dev_m2 + float(delta @ (observed.center - center))
    axes = hold.semi_axes + (observed.semi_axes - hold.semi_axes) / n
    variance = math.sqrt(sq_dev / (3.0 * (n - 1)))
    fused = hold.model_copy(
        update={
            "center_m": tuple(center),
            "semi_axes_m": tuple(axes),
            "observations": n,
            "center_sq_dev_m2": sq_dev,
            "centroid_variance_m": variance,
        }
    )
    return sdm.with_hold(fused)


def is_graspable(hold: Hold, goat: GoatParams) -> bool:
    """The gripper spans the hold's thinnest section and absorbs its position spread."""
    return 2.0 * float(min(hold.semi_axes_m)) <= goat.max_opening_m and hold.centroid_variance_m < goat.lateral_travel_m


def build_map(
    point_sets: Dict[str, np.ndarray],
    wall_points: Optional[np.ndarray] = None,
    solver: str = "CLARABEL",
) -> SparseMap:
    """Fit every hold point set and, optionally, the wall plane."""
    sdm = SparseMap()
    normal = WALL_NORMAL
    if wall_points is not None and len(wall_points):
        plane = fit_plane(wall_points)
        sdm = sdm.with_plane(plane)
        normal = plane.normal
    for hold_id, points in point_sets.items():
        fit = inscribe_ellipsoid(points, solver=solver)
        sdm = sdm.with_hold(hold_from_fit(hold_id, fit, normal))
        logger.info("hold %s: semi-axes %s", hold_id, np.round(fit.semi_axes, 4))
    return sdm


def save_map(sdm: SparseMap, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(sdm.model_dump_json(indent=2), encoding="utf-8")


def load_map(path: Path) -> SparseMap:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("version", MAP_VERSION) != MAP_VERSION:
        raise MappingError(f"unsupported map version {data.get('version')}")
    return SparseMap.model_validate(data)


def read_point_sets(path: Path) -> Tuple[Dict[str, np.ndarray], Optional[np.ndarray]]:
    """Per-hold point sets from JSON or XYZ text.

    JSON: ``{"holds": {id: [[x, y, z], ...]}, "wall": [[x, y, z], ...]}``.
    Text: ``x y z [label]`` rows (comma or whitespace separated); rows
    labelled ``wall`` feed the plane fit, unlabelled rows form one hold.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        holds = {str(k): np.asarray(v, dtype=float) for k, v in data.get("holds", {}).items()}
        wall = np.asarray(data["wall"], dtype=float) if data.get("wall") else None
        return holds, wall

    frame = pd.read_csv(path, sep=r"[,\s]+", header=None, comment="#", engine="python")
    if frame.shape[1] < 3:
        raise MappingError(f"{path} needs at least three columns")
    if frame.shape[1] == 3:
        return {path.stem: frame.to_numpy(dtype=float)}, None
    frame = frame.iloc[:, :4]
    frame.columns = ["x", "y", "z", "label"]
    frame["label"] = frame["label"].astype(str)
    wall_rows = frame[frame["label"] == "wall"]
    holds = {
        label: group[["x", "y", "z"]].to_numpy(dtype=float)
        for label, group in frame[frame["label"] != "wall"].groupby("label")
    }
    wall = wall_rows[["x", "y", "z"]].to_numpy(dtype=float) if len(wall_rows) else None
    return holds, wall
