"""Signed distance queries against mesh boundaries and tanh targets."""

import numpy as np

from .boundary import Boundary2D, Surface3D


def make_boundary(positions: np.ndarray, cells: np.ndarray):
    """Build a queryable boundary for a deformed mesh configuration.

    2D meshes yield their closed boundary polyline; 3D cell arrays are
    interpreted as a closed triangle surface.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape[1] == 2:
        return Boundary2D(positions, cells)
    return Surface3D(positions, cells)


def signed_distance(boundary, query) -> float:
    """Distance (scene units) to the boundary: positive outside, negative inside."""
    q = np.asarray(query, dtype=np.float64)
    single = q.ndim == 1
    out = boundary.signed_distance(np.atleast_2d(q))
    return float(out[0]) if single else out


def sdf_target(f, alpha: float):
    """Squash a signed distance into (-1, 1): s = tanh(alpha * f).

    Approaches an occupancy indicator as alpha grows; preserves the sign
    and the zero level set exactly.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return np.tanh(alpha * np.asarray(f, dtype=np.float64))
