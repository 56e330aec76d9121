"""Hold map construction and queries."""

from .ellipsoid import (
    DegeneratePoints,
    EllipsoidFit,
    MappingError,
    WallPlane,
    conservatism_ratio,
    ellipsoid_volume,
    equivalent_radius,
    fit_plane,
    get_hull,
    inscribe_ellipsoid,
)
from .sdm import (
    Hold,
    SparseMap,
    build_map,
    fuse_observation,
    hold_from_fit,
    is_graspable,
    load_map,
    read_point_sets,
    save_map,
    surface_slope,
)

__all__ = [
    "DegeneratePoints",
    "EllipsoidFit",
    "Hold",
    "MappingError",
    "SparseMap",
    "WallPlane",
    "build_map",
    "conservatism_ratio",
    "ellipsoid_volume",
    "equivalent_radius",
    "fit_plane",
    "fuse_observation",
    "get_hull",
    "hold_from_fit",
    "inscribe_ellipsoid",
    "is_graspable",
    "load_map",
    "read_point_sets",
    "save_map",
    "surface_slope",
]
