"""Geometry primitives: point sets, meshes, sampling, SDFs, observation."""

from .boundary import Boundary2D, Surface3D, boundary_edges
from .kernels import BACKEND, farthest_point_sample, knn, knn_batch, polyline_parity, segment_min_dist
from .observe import observe, point_to_mesh_distance
from .sdf import make_boundary, sdf_target, signed_distance
from .spacetime import LiftedSequence, SpaceTimePoint, spacetime_lift
from .types import (
    LABEL_COLLIDER,
    LABEL_DEFORMABLE,
    NODE_CLAMPED,
    NODE_INTERIOR,
    NODE_LOADED,
    Mesh,
    MeshTrajectory,
    PointCloudFrame,
    PointCloudSequence,
)

__all__ = [
    "BACKEND",
    "Boundary2D",
    "Surface3D",
    "LiftedSequence",
    "Mesh",
    "MeshTrajectory",
    "PointCloudFrame",
    "PointCloudSequence",
    "SpaceTimePoint",
    "LABEL_COLLIDER",
    "LABEL_DEFORMABLE",
    "NODE_CLAMPED",
    "NODE_INTERIOR",
    "NODE_LOADED",
    "boundary_edges",
    "farthest_point_sample",
    "knn",
    "knn_batch",
    "make_boundary",
    "observe",
    "point_to_mesh_distance",
    "polyline_parity",
    "sdf_target",
    "segment_min_dist",
    "signed_distance",
    "spacetime_lift",
]
