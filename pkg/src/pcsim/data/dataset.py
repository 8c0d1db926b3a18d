"""Dataset factory: samples tasks, runs the solver, writes files + manifest."""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import SolverError
from ..geom import MeshTrajectory, PointCloudSequence, observe
from .beam_mesh import triangulate_beam
from .fem import simulate_beam
from .io import DatasetManifest, write_trajectory
from .params import ParamRanges, TaskSkeleton, sample_geometry, sample_params
from .schedule import sample_schedule

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
BEAM_VIEW_DIR = (0.0, -1.0, 0.0)  # fixed scene camera above the beam


@dataclass
class ObservationConfig:
    points_per_frame: int = 256
    frame_stride: int = 2
    oversample: float = 4.0


@dataclass
class DatasetConfig:
    scene: str = "bending-beam"
    n_train: int = 40
    n_val: int = 8
    n_test: int = 8
    n_ood: int = 0  # defaults to n_test when generating an OOD split
    trajectories_per_task: int = 10
    internal_steps: int = 2000
    output_frames: int = 25
    t_end: float = 1.0
    newton_tol: float = 1e-8
    geometry_per_trajectory: bool = False
    ranges: ParamRanges = field(default_factory=ParamRanges)
    observation: ObservationConfig = field(default_factory=ObservationConfig)

    @classmethod
    def from_json(cls, path) -> "DatasetConfig":
        with open(path) as fh:
            d = json.load(fh)
        ranges = ParamRanges.from_dict(d.pop("ranges", {}))
        obs = ObservationConfig(**d.pop("observation", {}))
        return cls(ranges=ranges, observation=obs, **d)


def task_rng(seed: int, task_id: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, task_id, stream)))


def traj_rng(seed: int, task_id: int, traj_id: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, task_id, 1000 + traj_id, stream)))


def make_observation(traj: MeshTrajectory, cfg: ObservationConfig, rng) -> PointCloudSequence:
    """Observe every stride-th mesh frame with the fixed scene camera."""
    if cfg.points_per_frame < 1 or cfg.frame_stride < 1:
        raise ValueError("points_per_frame and frame_stride must be >= 1")
    frames = []
    for t in range(0, traj.n_steps, cfg.frame_stride):
        frames.append(
            observe(
                traj.positions[t],
                traj.mesh.cells,
                BEAM_VIEW_DIR,
                cfg.points_per_frame,
                rng,
                oversample=cfg.oversample,
            )
        )
    return PointCloudSequence(frames, traj.step_dt * cfg.frame_stride)


def _assign_splits(skeletons: list[TaskSkeleton], config: DatasetConfig, ood: bool) -> dict[str, list[int]]:
    ids = [s.task_id for s in skeletons]
    if not ood:
        a, b = config.n_train, config.n_train + config.n_val
        return {
            "train": ids[:a],
            "val": ids[a:b],
            "test": ids[b : b + config.n_test],
            "ood": [],
        }
    n_ood = config.n_ood or config.n_test
    by_nu = sorted(skeletons, key=lambda s: s.params.poisson_ratio)
    lo = n_ood // 2
    tail_ids = {s.task_id for s in by_nu[:lo]} | {s.task_id for s in by_nu[len(by_nu) - (n_ood - lo) :]}
    interior = [tid for tid in ids if tid not in tail_ids]
    a, b = config.n_train, config.n_train + config.n_val
    return {
        "train": interior[:a],
        "val": interior[a:b],
        "test": interior[b : b + config.n_test],
        "ood": sorted(tail_ids),
    }


def build_dataset(config: DatasetConfig, out_dir, seed: int, ood: bool = False) -> DatasetManifest:
    """Generate the full dataset on disk and return its manifest.

    Deterministic per (config, seed): every task and trajectory owns an rng
    stream derived from (seed, task_id, traj_id). Tasks whose solve fails are
    skipped with a logged warning and removed from the splits.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_ood = (config.n_ood or config.n_test) if ood else 0
    n_total = config.n_train + config.n_val + config.n_test + n_ood

    skeletons = []
    for task_id in range(n_total):
        r = task_rng(seed, task_id)
        skeletons.append(
            TaskSkeleton(task_id=task_id, params=sample_params(r, config.ranges), geometry=sample_geometry(r, config.ranges))
        )

    extent = max(max(s.geometry.length, s.geometry.height) for s in skeletons)
    normalization = {"scale": 1.0 / extent, "offset": [0.0, 0.0, 0.0]}
    splits = _assign_splits(skeletons, config, ood)

    failed: set[int] = set()
    for skel in skeletons:
        task_dir = out_dir / f"task_{skel.task_id:04d}"
        task_dir.mkdir(exist_ok=True)
        try:
            _generate_task(skel, config, task_dir, seed)
        except SolverError as err:
            log.warning("task %d skipped: %s", skel.task_id, err)
            failed.add(skel.task_id)
            for f in task_dir.glob("*"):
                f.unlink()
            task_dir.rmdir()

    splits = {k: [tid for tid in v if tid not in failed] for k, v in splits.items()}
    manifest = DatasetManifest(
        version=MANIFEST_VERSION,
        scene=config.scene,
        normalization=normalization,
        splits=splits,
        ranges=config.ranges.to_dict(),
        observation={"points": config.observation.points_per_frame, "stride": config.observation.frame_stride},
        root=out_dir,
    )
    manifest.save(out_dir)
    return manifest


def _generate_task(skel: TaskSkeleton, config: DatasetConfig, task_dir: Path, seed: int) -> None:
    with open(task_dir / "params.json", "w") as fh:
        json.dump(
            {
                "E": skel.params.youngs_modulus,
                "nu": skel.params.poisson_ratio,
                "tau_visc": skel.params.tau_visc,
                "geometry": {
                    "height": skel.geometry.height,
                    "length": skel.geometry.length,
                    "mesh_h": skel.geometry.mesh_h,
                },
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")

    mesh = triangulate_beam(skel.geometry)
    for traj_id in range(config.trajectories_per_task):
        if config.geometry_per_trajectory and traj_id > 0:
            geo = sample_geometry(traj_rng(seed, skel.task_id, traj_id, stream=2), replace(config.ranges))
            mesh_t = triangulate_beam(geo)
        else:
            mesh_t = mesh
        schedule = sample_schedule(traj_rng(seed, skel.task_id, traj_id), config.ranges)
        traj = simulate_beam(
            mesh_t,
            skel.params,
            schedule,
            internal_steps=config.internal_steps,
            output_frames=config.output_frames,
            newton_tol=config.newton_tol,
            t_end=config.t_end,
        )
        seq = make_observation(traj, config.observation, traj_rng(seed, skel.task_id, traj_id, stream=1))
        write_trajectory(task_dir / f"traj_{traj_id:03d}.bin", traj, seq)
