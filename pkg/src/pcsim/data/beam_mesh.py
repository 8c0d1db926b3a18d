"""Structured triangulation of the clamped rectangular beam."""

import numpy as np

from ..errors import ResolutionError
from ..geom import NODE_CLAMPED, NODE_INTERIOR, NODE_LOADED, Mesh
from .params import BeamGeometry


def triangulate_beam(geometry: BeamGeometry) -> Mesh:
    """Triangulate [0, L] x [0, H] with target edge length `mesh_h`.

    Left-edge nodes are clamped, right-edge nodes carry the load. Diagonals
    alternate per cell parity so the bending response has no directional
    bias. All cells are counter-clockwise.
    """
    length, h, target = geometry.length, geometry.height, geometry.mesh_h
    if target >= min(length, h):
        raise ResolutionError(f"mesh_h={target} must be smaller than min(L, H)={min(length, h)}")
    nx = max(1, int(np.floor(length / target + 0.5)))
    ny = max(1, int(np.floor(h / target + 0.5)))

    xs = np.linspace(0.0, length, nx + 1)
    ys = np.linspace(0.0, h, ny + 1)
    positions = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)

    def node(ix, iy):
        return ix * (ny + 1) + iy

    cells = []
    for ix in range(nx):
        for iy in range(ny):
            a = node(ix, iy)
            b = node(ix + 1, iy)
            c = node(ix + 1, iy + 1)
            d = node(ix, iy + 1)
            if (ix + iy) % 2 == 0:
                cells.append((a, b, c))
                cells.append((a, c, d))
            else:
                cells.append((a, b, d))
                cells.append((b, c, d))

    node_type = np.full(positions.shape[0], NODE_INTERIOR, dtype=np.uint8)
    node_type[[node(0, iy) for iy in range(ny + 1)]] = NODE_CLAMPED
    node_type[[node(nx, iy) for iy in range(ny + 1)]] = NODE_LOADED
    return Mesh(positions, np.asarray(cells, dtype=np.int64), node_type)
