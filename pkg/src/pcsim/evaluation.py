"""Rollout evaluation, context sweeps, and latent-space export."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .geom import PointCloudFrame, point_to_mesh_distance
from .training.loop import task_condition
from .training.pipeline import LoadedDataset, SimulationModel

DEFAULT_CONTEXT_RESERVE = 8


@dataclass
class EvalReport:
    split: str
    variant: str
    context_size: int
    metric: str
    rows: list[dict] = field(default_factory=list)  # per-trajectory entries
    task_means: dict[int, float] = field(default_factory=dict)
    mean: float = float("nan")
    std: float = float("nan")

    def finalize(self) -> "EvalReport":
        by_task: dict[int, list[float]] = {}
        for row in self.rows:
            by_task.setdefault(row["task_id"], []).append(row["value"])
        self.task_means = {t: float(np.mean(v)) for t, v in sorted(by_task.items())}
        values = np.array(list(self.task_means.values()))
        self.mean = float(values.mean())
        self.std = float(values.std())
        return self

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "variant": self.variant,
            "context_size": self.context_size,
            "metric": self.metric,
            "mean": self.mean,
            "std": self.std,
            "task_means": {str(k): v for k, v in self.task_means.items()},
            "trajectories": self.rows,
        }

    def save(self, path) -> None:
        path = Path(path)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(path.with_suffix(".csv"), "w") as fh:
            fh.write("task_id,traj_id,value\n")
            for row in self.rows:
                fh.write(f"{row['task_id']},{row['traj_id']},{row['value']:.10e}\n")


def _p2m_value(ds: LoadedDataset, task_id: int, traj_idx: int, pred: np.ndarray) -> float:
    rec = ds.tasks[task_id].trajectories[traj_idx]
    stride = ds.frame_stride
    vals = []
    for i, frame in enumerate(rec.seq.frames):
        mesh_frame = min(i * stride, pred.shape[0] - 1)
        norm_frame = PointCloudFrame(ds.norm_positions(frame.positions), frame.object_label)
        vals.append(point_to_mesh_distance(norm_frame, pred[mesh_frame], rec.traj.mesh.cells))
    return float(np.mean(vals))


def evaluate_model(
    model: SimulationModel,
    ds: LoadedDataset,
    split: str,
    context_size: int,
    metric: str = "mse",
    context_reserve: int = DEFAULT_CONTEXT_RESERVE,
) -> EvalReport:
    """Full-rollout error on a split.

    The first `context_reserve` trajectories of every task are reserved for
    context (the first `context_size` of them are used); the remaining
    trajectories are rollout targets, so target sets are identical across
    context sizes and across model variants.
    """
    if metric not in ("mse", "p2m"):
        raise ValueError("metric must be 'mse' or 'p2m'")
    if split not in ds.manifest.splits:
        raise ValueError(f"unknown split {split!r}")
    ids = ds.split_ids(split)
    if not ids:
        raise ValueError(f"split {split!r} is empty")
    report = EvalReport(split=split, variant=model.variant, context_size=context_size, metric=metric)
    with torch.no_grad():
        for task_id in ids:
            rec = ds.tasks[task_id]
            cond = task_condition(model, ds, task_id, context_size)
            start = min(context_reserve, len(rec.trajectories) - 1)
            for idx in range(start, len(rec.trajectories)):
                graph, gt = ds.target_graph(task_id, idx, None)
                pred = model.rollout(graph, cond)
                if metric == "mse":
                    value = float(((pred - gt) ** 2).mean())
                else:
                    value = _p2m_value(ds, task_id, idx, pred.numpy().astype(np.float64))
                report.rows.append({"task_id": task_id, "traj_id": idx, "value": value})
    return report.finalize()


def context_sweep(
    model: SimulationModel,
    ds: LoadedDataset,
    split: str = "test",
    c_list: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8),
    metric: str = "mse",
) -> list[EvalReport]:
    """One report per context size over a shared target-trajectory set."""
    reserve = max(max(c_list), DEFAULT_CONTEXT_RESERVE)
    return [evaluate_model(model, ds, split, c, metric=metric, context_reserve=reserve) for c in c_list]


def pca_2d(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First two principal axes (orthonormal) and the projected coordinates."""
    centered = rows - rows.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(len(rows) - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    axes = eigvecs[:, order[:2]].T  # (2, d)
    return axes, centered @ axes.T


def export_latents(model: SimulationModel, ds: LoadedDataset, out_path, split: str = "test",
                   context_size: int = 8) -> np.ndarray:
    """Aggregate each task's context into a latent row and write the table.

    Columns: task_id, E, nu, tau_visc, r0..r{d-1}, pc1, pc2.
    """
    if model.variant != "peach":
        raise ValueError("latent export requires the in-context model")
    ids = ds.split_ids(split)
    lat = []
    with torch.no_grad():
        for task_id in ids:
            code = task_condition(model, ds, task_id, context_size)
            lat.append(code.numpy().astype(np.float64))
    lat = np.stack(lat)
    _, coords = pca_2d(lat)

    d = lat.shape[1]
    header = ["task_id", "E", "nu", "tau_visc"] + [f"r{i}" for i in range(d)] + ["pc1", "pc2"]
    out_path = Path(out_path)
    with open(out_path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row_i, task_id in enumerate(ids):
            e, nu, tau = ds.params_raw(task_id)
            vals = [str(task_id), f"{e:.10e}", f"{nu:.10e}", f"{tau:.10e}"]
            vals += [f"{v:.10e}" for v in lat[row_i]]
            vals += [f"{coords[row_i, 0]:.10e}", f"{coords[row_i, 1]:.10e}"]
            fh.write(",".join(vals) + "\n")
    return np.concatenate([lat, coords], axis=1)


def spearman(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation (average ranks on ties)."""
    from scipy.stats import rankdata

    ra, rb = rankdata(a), rankdata(b)
    ra = (ra - ra.mean()) / max(ra.std(), 1e-300)
    rb = (rb - rb.mean()) / max(rb.std(), 1e-300)
    return float((ra * rb).mean())
