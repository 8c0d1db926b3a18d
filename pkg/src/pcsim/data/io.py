"""Binary trajectory files and the dataset manifest.

Trajectory layout (little-endian): magic "PCHT", u32 version, u32 T, V, C,
dim, T_pc, P, then f32 rest_positions[V*dim], u32 cells[C*3], u8 node_type[V],
f32 positions[T*V*dim], f32 loads[T*V*dim], f32 points[T_pc*P*3],
u8 point_label[T_pc*P].
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..geom import Mesh, MeshTrajectory, PointCloudFrame, PointCloudSequence

TRAJ_MAGIC = b"PCHT"
TRAJ_VERSION = 1


def _write_array(fh, arr: np.ndarray, dtype):
    fh.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())


def _read_array(fh, count: int, dtype) -> np.ndarray:
    dt = np.dtype(dtype)
    buf = fh.read(count * dt.itemsize)
    if len(buf) != count * dt.itemsize:
        raise ValueError("truncated trajectory file")
    return np.frombuffer(buf, dtype=dt, count=count)


def write_trajectory(path, traj: MeshTrajectory, seq: PointCloudSequence) -> None:
    mesh = traj.mesh
    points, labels = seq.stacked()
    t, v, dim = traj.positions.shape
    t_pc, p, _ = points.shape
    with open(path, "wb") as fh:
        fh.write(TRAJ_MAGIC)
        header = np.array([TRAJ_VERSION, t, v, len(mesh.cells), dim, t_pc, p], dtype="<u4")
        fh.write(header.tobytes())
        _write_array(fh, mesh.rest_positions, "<f4")
        _write_array(fh, mesh.cells, "<u4")
        _write_array(fh, mesh.node_type, "u1")
        _write_array(fh, traj.positions, "<f4")
        _write_array(fh, traj.loads, "<f4")
        _write_array(fh, points, "<f4")
        _write_array(fh, labels, "u1")


def read_trajectory(path, t_end: float = 1.0) -> tuple[MeshTrajectory, PointCloudSequence]:
    with open(path, "rb") as fh:
        if fh.read(4) != TRAJ_MAGIC:
            raise ValueError(f"{path}: not a trajectory file")
        version, t, v, n_cells, dim, t_pc, p = _read_array(fh, 7, "<u4")
        if version != TRAJ_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        rest = _read_array(fh, v * dim, "<f4").reshape(v, dim).astype(np.float64)
        cells = _read_array(fh, n_cells * 3, "<u4").reshape(n_cells, 3).astype(np.int64)
        node_type = _read_array(fh, v, "u1").copy()
        positions = _read_array(fh, t * v * dim, "<f4").reshape(t, v, dim).astype(np.float64)
        loads = _read_array(fh, t * v * dim, "<f4").reshape(t, v, dim).astype(np.float64)
        points = _read_array(fh, t_pc * p * 3, "<f4").reshape(t_pc, p, 3).astype(np.float64)
        labels = _read_array(fh, t_pc * p, "u1").reshape(t_pc, p).copy()

    mesh = Mesh(rest, cells, node_type)
    step_dt = t_end / max(int(t) - 1, 1)
    frame_dt = step_dt * (int(t) - 1) / max(int(t_pc) - 1, 1)
    traj = MeshTrajectory(mesh=mesh, positions=positions, loads=loads, step_dt=step_dt)
    frames = [PointCloudFrame(points[i], labels[i]) for i in range(t_pc)]
    return traj, PointCloudSequence(frames, frame_dt)


@dataclass
class DatasetManifest:
    """Index of a generated dataset; serialized as manifest.json."""

    version: int
    scene: str
    normalization: dict
    splits: dict[str, list[int]]
    ranges: dict
    observation: dict
    root: Path = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        ids = [tid for s in self.splits.values() for tid in s]
        if len(ids) != len(set(ids)):
            raise ValueError("splits are not pairwise disjoint")

    def task_dir(self, task_id: int) -> Path:
        return Path(self.root) / f"task_{task_id:04d}"

    def task_params(self, task_id: int) -> dict:
        with open(self.task_dir(task_id) / "params.json") as fh:
            return json.load(fh)

    def trajectory_paths(self, task_id: int) -> list[Path]:
        d = self.task_dir(task_id)
        return sorted(d.glob("traj_*.bin"))

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "scene": self.scene,
            "normalization": self.normalization,
            "splits": self.splits,
            "ranges": self.ranges,
            "observation": self.observation,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def save(self, out_dir) -> None:
        with open(Path(out_dir) / "manifest.json", "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, root) -> "DatasetManifest":
        root = Path(root)
        with open(root / "manifest.json") as fh:
            d = json.load(fh)
        return cls(
            version=d["version"],
            scene=d["scene"],
            normalization=d["normalization"],
            splits={k: list(v) for k, v in d["splits"].items()},
            ranges=d["ranges"],
            observation=d["observation"],
            root=root,
        )
