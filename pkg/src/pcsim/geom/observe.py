"""Synthetic point cloud observation of a deformed mesh and the
point-to-mesh evaluation metric."""

import numpy as np

from ..errors import VisibilityError
from .boundary import Boundary2D, boundary_edges, point_triangle_distance
from .kernels import farthest_point_sample, segment_min_dist
from .types import LABEL_DEFORMABLE, PointCloudFrame


def observe(
    positions: np.ndarray,
    cells: np.ndarray,
    view_dir,
    n_points: int,
    rng,
    oversample: float = 4.0,
    edges: np.ndarray | None = None,
) -> PointCloudFrame:
    """Sample a camera-facing point cloud from one mesh configuration.

    Boundary segments whose outward normal n satisfies n . view_dir < 0 are
    densely sampled (midpoint rule, ~oversample * n_points candidates) and
    reduced to exactly n_points by farthest point sampling. Deterministic
    given the rng state; 2D scenes are embedded with z = 0.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if positions.shape[1] != 2:
        raise NotImplementedError("observation synthesis is implemented for 2D meshes")
    view = np.asarray(view_dir, dtype=np.float64)[: positions.shape[1]]

    boundary = Boundary2D(positions, cells, edges=edges)
    visible = boundary.normals @ view < 0.0
    vis_len = float(boundary.lengths[visible].sum())
    if not visible.any() or vis_len <= 0.0:
        raise VisibilityError("no boundary element faces the camera")

    spacing = vis_len / (oversample * n_points)
    dense = boundary.sample_dense(spacing, mask=visible)
    while dense.shape[0] < n_points:
        spacing *= 0.5
        dense = boundary.sample_dense(spacing, mask=visible)

    keep = farthest_point_sample(dense, n_points, rng=rng)
    pts3 = np.zeros((n_points, 3), dtype=np.float64)
    pts3[:, :2] = dense[keep]
    labels = np.full(n_points, LABEL_DEFORMABLE, dtype=np.uint8)
    return PointCloudFrame(pts3, labels)


def point_to_mesh_distance(frame: PointCloudFrame, positions: np.ndarray, cells: np.ndarray) -> float:
    """Mean distance from observed points to the closest boundary element."""
    positions = np.asarray(positions, dtype=np.float64)
    pts = frame.positions[:, : positions.shape[1]]
    if positions.shape[1] == 2:
        edges = boundary_edges(cells)
        d = segment_min_dist(pts, positions[edges[:, 0]], positions[edges[:, 1]])
    else:
        d = point_triangle_distance(pts, positions, cells)
    return float(d.mean())
