"""Maximum-volume inscribed ellipsoids and plane fits for segmented hold points."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import cvxpy as cp
import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..config import SOLVER_OPTIONS, QuadclimbError

logger = logging.getLogger(__name__)


class MappingError(QuadclimbError):
    """Base class for map building failures."""


class DegeneratePoints(MappingError):
    """Points do not span the dimension the fit needs."""


@dataclass(frozen=True)
class EllipsoidFit:
    """Ellipsoid ``{shape @ u + center : |u| <= 1}`` inside a point hull."""

    center: np.ndarray
    shape: np.ndarray
    semi_axes: np.ndarray
    orientation: np.ndarray
    hull_volume: float
    containment_slack: float

    @property
    def volume(self) -> float:
        return ellipsoid_volume(self.semi_axes)


@dataclass(frozen=True)
class WallPlane:
    """Plane ``normal . x = offset`` with the RMS of the fitted points."""

    normal: np.ndarray
    offset: float
    rms: float

    def distance(self, point: np.ndarray) -> float:
        return float(self.normal @ np.asarray(point, dtype=float) - self.offset)


def ellipsoid_volume(semi_axes: np.ndarray) -> float:
    return 4.0 / 3.0 * math.pi * float(np.prod(semi_axes))


def equivalent_radius(volume: float) -> float:
    return (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)


def _as_points(points: np.ndarray, minimum: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < minimum:
        raise DegeneratePoints(f"need at least {minimum} points, got {len(pts)}")
    return pts


def _rank(pts: np.ndarray, tol: float = 1e-9) -> int:
    centered = pts - pts.mean(axis=0)
    scale = max(float(np.abs(centered).max()), 1e-300)
    singular = np.linalg.svd(centered / scale, compute_uv=False)
    return int((singular > tol * max(singular[0], 1e-300)).sum()) if singular.size else 0


FALLBACK_SOLVER = "SCS"


def get_hull(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray, ConvexHull]:
    """Half-spaces ``A x <= b`` (unit normals) of the convex hull.

    Qhull triangulates planar faces, so coplanar facets come back as
    repeated rows; those are merged.
    """
    try:
        hull = ConvexHull(pts)
    except QhullError as e:
        raise DegeneratePoints(f"convex hull failed: {e}") from e
    a = hull.equations[:, :3]
    b = -hull.equations[:, 3]
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    a, b = a / norms, b / norms[:, 0]
    _, keep = np.unique(np.round(np.column_stack([a, b]), 9), axis=0, return_index=True)
    keep = np.sort(keep)
    return a[keep], b[keep], hull


def _whitening(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean, map ``M`` and whitened points ``w`` with ``x = mean + M w``.

    The whitened cloud has identity covariance scaled into the unit ball.
    """
    mean = pts.mean(axis=0)
    centered = pts - mean
    _, sigma, vt = np.linalg.svd(centered, full_matrices=False)
    sigma = sigma / math.sqrt(len(pts))
    white = centered @ vt.T / sigma
    scale = float(np.linalg.norm(white, axis=1).max())
    return mean, vt.T @ np.diag(sigma * scale), white / scale


def _solve_mvie(a: np.ndarray, b: np.ndarray, solvers: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    shape = cp.Variable((3, 3), PSD=True)
    center = cp.Variable(3)
    constraints = [cp.norm(a @ shape, 2, axis=1) + a @ center <= b]
    problem = cp.Problem(cp.Maximize(cp.log_det(shape)), constraints)

    inaccurate: Optional[Tuple[np.ndarray, np.ndarray]] = None
    failures = []
    for name in solvers:
        try:
            problem.solve(solver=name, **SOLVER_OPTIONS.get(name, {}))
        except cp.error.SolverError as e:
            logger.debug(f"{name} failed on {len(a)} facets: {e}")
            failures.append(f"{name}: {e}")
            continue
        if problem.status == cp.OPTIMAL:
            return shape.value, center.value
        if problem.status == cp.OPTIMAL_INACCURATE and inaccurate is None:
            inaccurate = (shape.value, center.value)
        failures.append(f"{name}: {problem.status}")
    if inaccurate is not None:
        logger.warning(f"ellipsoid fit is only approximately optimal ({'; '.join(failures)})")
        return inaccurate
    raise MappingError(f"ellipsoid solve failed: {'; '.join(failures)}")


def inscribe_ellipsoid(points: np.ndarray, solver: str = "CLARABEL") -> EllipsoidFit:
    """Largest-volume ellipsoid inside the convex hull of ``points``.

    Solved on whitened points and mapped back, so the result follows any
    affine change of the input. ``solver`` is tried first and SCS second.
    The solution is rescaled about its center until it touches the hull.
    """
    pts = _as_points(points, 4)
    if _rank(pts) < 3:
        raise DegeneratePoints("points are coplanar or collinear")
    mean, mapping, white = _whitening(pts)
    a, b, hull = get_hull(white)

    solvers = [solver] if solver == FALLBACK_SOLVER else [solver, FALLBACK_SOLVER]
    shape_w, center_w = _solve_mvie(a, b, solvers)
    shape_w = 0.5 * (shape_w + shape_w.T)
    reach = np.linalg.norm(a @ shape_w, axis=1)
    shape_w = shape_w * float(np.min((b - a @ center_w) / reach))

    # World half-spaces, unit normals.
    inverse = np.linalg.inv(mapping)
    a_world = a @ inverse
    b_world = b + a_world @ mean
    norms = np.linalg.norm(a_world, axis=1)
    a_world, b_world = a_world / norms[:, None], b_world / norms

    d = mapping @ center_w + mean
    u, semi_axes, _ = np.linalg.svd(mapping @ shape_w)
    orientation = u.copy()
    if np.linalg.det(orientation) < 0:
        orientation[:, 2] *= -1.0
    b_mat = u @ np.diag(semi_axes) @ u.T
    slack = float(np.min(b_world - a_world @ d - np.linalg.norm(a_world @ b_mat, axis=1)))
    return EllipsoidFit(
        center=d,
        shape=b_mat,
        semi_axes=semi_axes,
        orientation=orientation,
        hull_volume=float(hull.volume) * abs(float(np.linalg.det(mapping))),
        containment_slack=slack,
    )


def conservatism_ratio(fit: EllipsoidFit) -> float:
    """Ellipsoid equivalent radius over hull equivalent radius."""
    return equivalent_radius(fit.volume) / equivalent_radius(fit.hull_volume)


def fit_plane(points: np.ndarray) -> WallPlane:
    """Total-least-squares plane through ``points``."""
    pts = _as_points(points, 3)
    if _rank(pts) < 2:
        raise DegeneratePoints("points are collinear")
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid)
    normal = vt[-1]
    # Deterministic sign: largest component positive.
    if normal[np.argmax(np.abs(normal))] < 0:
        normal = -normal
    residuals = (pts - centroid) @ normal
    return WallPlane(normal=normal, offset=float(normal @ centroid), rms=float(np.sqrt(np.mean(residuals ** 2))))
