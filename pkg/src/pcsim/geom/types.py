"""Core geometric containers: point cloud frames/sequences and meshes."""

from dataclasses import dataclass, field

import numpy as np

NODE_INTERIOR = 0
NODE_CLAMPED = 1
NODE_LOADED = 2

LABEL_DEFORMABLE = 0
LABEL_COLLIDER = 1


@dataclass
class PointCloudFrame:
    """Unordered points observed at one time step.

    positions: (N, dim) with dim in {2, 3}; object_label: (N,) uint8 where
    0 marks deformable-object points and 1 collider points.
    """

    positions: np.ndarray
    object_label: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.object_label = np.asarray(self.object_label, dtype=np.uint8)
        if self.positions.ndim != 2 or self.positions.shape[1] not in (2, 3):
            raise ValueError(f"positions must be (N, 2|3), got {self.positions.shape}")
        if self.positions.shape[0] < 1:
            raise ValueError("a frame needs at least one point")
        if not np.isfinite(self.positions).all():
            raise ValueError("non-finite point coordinates")
        if self.object_label.shape != (self.positions.shape[0],):
            raise ValueError("object_label must be (N,)")
        if self.object_label.max(initial=0) > 1:
            raise ValueError("object_label values must be 0 or 1")

    @property
    def n_points(self) -> int:
        return self.positions.shape[0]


@dataclass
class PointCloudSequence:
    """Ordered frames; the only observation available at inference time."""

    frames: list[PointCloudFrame]
    frame_dt: float

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValueError("a sequence needs at least one frame")
        counts = {f.n_points for f in self.frames}
        if len(counts) != 1:
            raise ValueError(f"frames disagree on point count: {sorted(counts)}")

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def points_per_frame(self) -> int:
        return self.frames[0].n_points

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (T, P, dim) positions and (T, P) labels."""
        pos = np.stack([f.positions for f in self.frames])
        lab = np.stack([f.object_label for f in self.frames])
        return pos, lab


def _cell_areas(positions: np.ndarray, cells: np.ndarray) -> np.ndarray:
    a = positions[cells[:, 0]]
    b = positions[cells[:, 1]]
    c = positions[cells[:, 2]]
    if positions.shape[1] == 2:
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    n = np.cross(b - a, c - a)
    return 0.5 * np.linalg.norm(n, axis=1)


@dataclass
class Mesh:
    """Static triangle mesh with per-node boundary-condition roles."""

    rest_positions: np.ndarray
    cells: np.ndarray
    node_type: np.ndarray

    def __post_init__(self):
        self.rest_positions = np.asarray(self.rest_positions, dtype=np.float64)
        self.cells = np.asarray(self.cells, dtype=np.int64)
        self.node_type = np.asarray(self.node_type, dtype=np.uint8)
        v = self.rest_positions.shape[0]
        if self.rest_positions.ndim != 2 or self.rest_positions.shape[1] not in (2, 3):
            raise ValueError("rest_positions must be (V, 2|3)")
        if self.cells.ndim != 2 or self.cells.shape[1] != 3:
            raise ValueError("cells must be (C, 3)")
        if self.cells.min(initial=0) < 0 or self.cells.max(initial=-1) >= v:
            raise ValueError("cell index out of range")
        if self.node_type.shape != (v,):
            raise ValueError("node_type must be (V,)")
        if self.node_type.max(initial=0) > NODE_LOADED:
            raise ValueError("unknown node_type value")
        if np.any(np.abs(_cell_areas(self.rest_positions, self.cells)) < 1e-14):
            raise ValueError("degenerate (zero-area) cell")

    @property
    def n_nodes(self) -> int:
        return self.rest_positions.shape[0]

    @property
    def dim(self) -> int:
        return self.rest_positions.shape[1]

    @property
    def clamped(self) -> np.ndarray:
        return np.flatnonzero(self.node_type == NODE_CLAMPED)

    @property
    def loaded(self) -> np.ndarray:
        return np.flatnonzero(self.node_type == NODE_LOADED)


@dataclass
class MeshTrajectory:
    """Mesh connectivity plus per-step node positions and known loads."""

    mesh: Mesh
    positions: np.ndarray
    loads: np.ndarray
    step_dt: float
    newton_residuals: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.loads = np.asarray(self.loads, dtype=np.float64)
        t, v, d = self.positions.shape
        if (v, d) != (self.mesh.n_nodes, self.mesh.dim):
            raise ValueError("positions shape does not match mesh")
        if self.loads.shape != self.positions.shape:
            raise ValueError("loads shape must match positions")
        if not (np.isfinite(self.positions).all() and np.isfinite(self.loads).all()):
            raise ValueError("non-finite trajectory data")
        if not np.array_equal(self.positions[0], self.mesh.rest_positions):
            raise ValueError("positions[0] must equal rest_positions")
        clamped = self.mesh.clamped
        if clamped.size and not np.array_equal(
            self.positions[:, clamped], np.broadcast_to(self.mesh.rest_positions[clamped], (t, clamped.size, d))
        ):
            raise ValueError("clamped nodes moved")

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0]
