"""Boundary extraction for triangle meshes: 2D loops and 3D surfaces."""

import numpy as np

from ..errors import TopologyError
from . import kernels


def boundary_edges(cells: np.ndarray) -> np.ndarray:
    """Return (B, 3) rows (a, b, opposite-vertex) for edges owned by one cell.

    Rows are canonically ordered by (min(a, b), max(a, b)) so the result is
    independent of cell ordering; (a, b) keeps the owning cell's winding.
    """
    cells = np.asarray(cells, dtype=np.int64)
    e = np.concatenate(
        [
            cells[:, [0, 1, 2]],
            cells[:, [1, 2, 0]],
            cells[:, [2, 0, 1]],
        ]
    )
    key = np.stack([np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])], axis=1)
    uniq, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    on_boundary = counts[inv] == 1
    edges = e[on_boundary]
    order = np.lexsort((np.maximum(edges[:, 0], edges[:, 1]), np.minimum(edges[:, 0], edges[:, 1])))
    return edges[order]


class Boundary2D:
    """Closed boundary polyline of a 2D triangle mesh at one configuration."""

    def __init__(self, positions: np.ndarray, cells: np.ndarray, edges: np.ndarray | None = None):
        positions = np.asarray(positions, dtype=np.float64)
        if positions.shape[1] != 2:
            raise ValueError("Boundary2D expects (V, 2) positions")
        if edges is None:
            edges = boundary_edges(cells)
        if len(edges) == 0:
            raise TopologyError("mesh has no boundary edges")
        nodes, degree = np.unique(edges[:, :2], return_counts=True)
        if np.any(degree != 2):
            raise TopologyError("boundary is not a closed polyline")
        self.edges = edges
        self.seg_a = positions[edges[:, 0]]
        self.seg_b = positions[edges[:, 1]]
        tangent = self.seg_b - self.seg_a
        self.lengths = np.linalg.norm(tangent, axis=1)
        # right-hand normal of the directed edge, flipped away from the
        # owning cell's opposite vertex -> outward regardless of winding
        normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
        normal /= np.maximum(self.lengths, 1e-300)[:, None]
        to_opp = positions[edges[:, 2]] - self.seg_a
        flip = np.einsum("sd,sd->s", normal, to_opp) > 0.0
        normal[flip] *= -1.0
        self.normals = normal

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def distance(self, queries: np.ndarray) -> np.ndarray:
        return kernels.segment_min_dist(np.atleast_2d(queries), self.seg_a, self.seg_b)

    def signed_distance(self, queries: np.ndarray) -> np.ndarray:
        """Positive outside, negative inside (even-odd parity)."""
        q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        d = kernels.segment_min_dist(q, self.seg_a, self.seg_b)
        inside = kernels.polyline_parity(q, self.seg_a, self.seg_b)
        return np.where(inside, -d, d)

    def sample_dense(self, spacing: float, mask: np.ndarray | None = None) -> np.ndarray:
        """Midpoint samples along (optionally masked) segments, ~`spacing` apart."""
        idx = np.flatnonzero(mask) if mask is not None else np.arange(len(self.lengths))
        chunks = []
        for s in idx:
            ns = max(1, int(np.ceil(self.lengths[s] / spacing)))
            t = (np.arange(ns, dtype=np.float64) + 0.5) / ns
            chunks.append(self.seg_a[s] + t[:, None] * (self.seg_b[s] - self.seg_a[s]))
        if not chunks:
            return np.zeros((0, 2))
        return np.concatenate(chunks, axis=0)

    def sample_uniform(self, count: int, rng) -> np.ndarray:
        """`count` random points on the boundary, area-weighted by length."""
        w = self.lengths / self.lengths.sum()
        seg = rng.choice(len(w), size=count, p=w)
        t = rng.random(count)
        return self.seg_a[seg] + t[:, None] * (self.seg_b[seg] - self.seg_a[seg])


class Surface3D:
    """Closed, consistently oriented triangle surface in 3D."""

    def __init__(self, positions: np.ndarray, tris: np.ndarray):
        positions = np.asarray(positions, dtype=np.float64)
        tris = np.asarray(tris, dtype=np.int64)
        if positions.shape[1] != 3:
            raise ValueError("Surface3D expects (V, 3) positions")
        directed = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        fwd = {tuple(e) for e in directed.tolist()}
        if len(fwd) != len(directed):
            raise TopologyError("surface has a repeated directed edge")
        for a, b in fwd:
            if (b, a) not in fwd:
                raise TopologyError("surface is not closed / not consistently oriented")
        self.positions = positions
        self.tris = tris

    def distance(self, queries: np.ndarray) -> np.ndarray:
        return point_triangle_distance(np.atleast_2d(queries), self.positions, self.tris)

    def signed_distance(self, queries: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        d = self.distance(q)
        inside = winding_number(q, self.positions, self.tris) > 0.5
        return np.where(inside, -d, d)


def point_triangle_distance(points: np.ndarray, positions: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Min distance from each point to any triangle (dense, small inputs)."""
    a = positions[tris[:, 0]][None, :, :]  # (1, T, 3)
    b = positions[tris[:, 1]][None, :, :]
    c = positions[tris[:, 2]][None, :, :]
    p = points[:, None, :]  # (P, 1, 3)

    n = np.cross(b - a, c - a)
    nn = np.einsum("ptd,ptd->pt", n, n)
    nn = np.where(nn == 0.0, 1.0, nn)
    # barycentric coordinates of the in-plane projection
    ap = p - a
    d_plane = np.einsum("ptd,ptd->pt", ap, n) / np.sqrt(nn)
    w_b = np.einsum("ptd,ptd->pt", np.cross(ap, c - a), n) / nn
    w_c = np.einsum("ptd,ptd->pt", np.cross(b - a, ap), n) / nn
    w_a = 1.0 - w_b - w_c
    inside = (w_a >= 0) & (w_b >= 0) & (w_c >= 0)

    def seg_d2(s0, s1):
        d = s1 - s0
        dd = np.einsum("ptd,ptd->pt", d, d)
        dd = np.where(dd == 0.0, 1.0, dd)
        t = np.clip(np.einsum("ptd,ptd->pt", p - s0, d) / dd, 0.0, 1.0)
        diff = p - (s0 + t[:, :, None] * d)
        return np.einsum("ptd,ptd->pt", diff, diff)

    edge_d2 = np.minimum(np.minimum(seg_d2(a, b), seg_d2(b, c)), seg_d2(c, a))
    d2 = np.where(inside, d_plane * d_plane, edge_d2)
    return np.sqrt(d2.min(axis=1))


def winding_number(points: np.ndarray, positions: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Generalized winding number of each point wrt an oriented surface."""
    a = positions[tris[:, 0]][None, :, :] - points[:, None, :]
    b = positions[tris[:, 1]][None, :, :] - points[:, None, :]
    c = positions[tris[:, 2]][None, :, :] - points[:, None, :]
    la = np.linalg.norm(a, axis=2)
    lb = np.linalg.norm(b, axis=2)
    lc = np.linalg.norm(c, axis=2)
    num = np.einsum("ptd,ptd->pt", a, np.cross(b, c))
    den = (
        la * lb * lc
        + np.einsum("ptd,ptd->pt", a, b) * lc
        + np.einsum("ptd,ptd->pt", b, c) * la
        + np.einsum("ptd,ptd->pt", c, a) * lb
    )
    omega = 2.0 * np.arctan2(num, den)
    return omega.sum(axis=1) / (4.0 * np.pi)
