"""End-to-end optimization: sampling, losses, AdamW, validation, checkpoints."""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import torch

from ..data import AugmentConfig, augment
from .losses import LossWeights, param_aux_loss, rollout_loss, total_loss
from .pipeline import LoadedDataset, ModelConfig, SimulationModel, load_dataset, save_model
from .sdf_head import sample_sdf_queries


@dataclass
class TrainConfig:
    steps: int = 2000
    batch_size: int = 1
    learning_rate: float = 5.0e-5
    weight_decay: float = 1.0e-4
    context_min: int = 1
    context_max: int = 8
    seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)
    aux_param: bool = True
    aux_sdf: bool = True
    augment_enabled: bool = True
    augment: AugmentConfig = field(default_factory=lambda: AugmentConfig(
        jitter_scales=(0.002, 0.008), dropout_balls=2, dropout_radius=0.06, artifacts=4
    ))
    loss_weights: LossWeights = field(default_factory=LossWeights)
    val_every: int = 100
    val_context: int = 8
    fps_rerandomize: bool = True
    sdf_contexts: int = 2  # context sequences per step that receive the SDF loss

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 1 <= self.context_min <= self.context_max:
            raise ValueError("need 1 <= context_min <= context_max")


@dataclass
class TrainResult:
    checkpoint: Path
    best_checkpoint: Path
    metrics_path: Path
    final_val: float
    best_val: float


def _context_split(n_traj: int, c: int, rng) -> tuple[list[int], int]:
    """Pick c context indices and one target, excluding the target when possible."""
    ids = rng.permutation(n_traj)
    if n_traj > c:
        return ids[:c].tolist(), int(ids[c])
    context = rng.integers(0, n_traj, size=c).tolist()
    return context, int(rng.integers(n_traj))


def validation_mse(model: SimulationModel, ds: LoadedDataset, split: str, context_size: int,
                   context_reserve: int | None = None) -> float:
    """Mean over tasks of the mean full-rollout MSE on held-out trajectories.

    The first `context_reserve` trajectories of each task are reserved as
    context; targets are the remainder, so reports are comparable across
    context sizes and model variants.
    """
    reserve = context_reserve if context_reserve is not None else context_size
    task_means = []
    with torch.no_grad():
        for task_id in ds.split_ids(split):
            rec = ds.tasks[task_id]
            cond = task_condition(model, ds, task_id, context_size)
            per_traj = []
            for idx in range(min(reserve, len(rec.trajectories) - 1), len(rec.trajectories)):
                graph, gt = ds.target_graph(task_id, idx, None)
                pred = model.rollout(graph, cond)
                per_traj.append(float(((pred - gt) ** 2).mean()))
            task_means.append(float(np.mean(per_traj)))
    return float(np.mean(task_means))


def task_condition(model: SimulationModel, ds: LoadedDataset, task_id: int, context_size: int) -> torch.Tensor | None:
    """Deterministic conditioning for evaluation: the task's first C sequences."""
    if model.variant == "nocontext":
        return None
    if model.variant == "oracle":
        return torch.as_tensor(ds.params_z(task_id), dtype=torch.float32)
    rec = ds.tasks[task_id]
    seqs = [ds.norm_sequence(rec.trajectories[i].seq) for i in range(min(context_size, len(rec.trajectories)))]
    code, _, _ = model.encode_context(seqs)
    return code


class Trainer:
    def __init__(self, cfg: TrainConfig, ds: LoadedDataset):
        self.cfg = cfg
        self.ds = ds
        torch.manual_seed(cfg.seed)
        self.model = SimulationModel(cfg.model, ds.rollout_frames, ds.spatial_dim)
        with torch.no_grad():
            self.model.simulator.disp_scale.fill_(ds.disp_scale)
        self.opt = torch.optim.AdamW(self.model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay)
        self.rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xC0)))
        self.train_ids = ds.split_ids("train")
        if not self.train_ids:
            raise ValueError("empty train split")

    def _sample_losses(self) -> dict[str, torch.Tensor | None]:
        cfg, ds, model = self.cfg, self.ds, self.model
        task_id = int(self.rng.choice(self.train_ids))
        rec = ds.tasks[task_id]
        c = int(self.rng.integers(cfg.context_min, cfg.context_max + 1))
        context_ids, target_idx = _context_split(len(rec.trajectories), c, self.rng)

        parts: dict[str, torch.Tensor | None] = {"param_aux": None, "sdf_aux": None}
        cond: torch.Tensor | None = None
        if model.variant == "oracle":
            cond = torch.as_tensor(ds.params_z(task_id), dtype=torch.float32)
        elif model.variant == "peach":
            seqs = []
            for i in context_ids:
                seq = ds.norm_sequence(rec.trajectories[i].seq)
                if cfg.augment_enabled:
                    seq = augment(seq, cfg.augment, self.rng)
                seqs.append(seq)
            fps_rng = self.rng if cfg.fps_rerandomize else None
            cond, _, bundles = model.encode_context(seqs, rng=fps_rng)
            if cfg.aux_param:
                target_z = torch.as_tensor(ds.params_z(task_id), dtype=cond.dtype)
                parts["param_aux"] = param_aux_loss(model.param_head(cond), target_z)
            if cfg.aux_sdf:
                sdf_losses = []
                for j in range(min(cfg.sdf_contexts, len(context_ids))):
                    src = rec.trajectories[context_ids[j]]
                    queries, targets = sample_sdf_queries(
                        ds.norm_positions(src.traj.positions),
                        src.traj.mesh.cells,
                        src.seq.n_frames,
                        ds.frame_stride,
                        cfg.model.encoder.tau,
                        cfg.model.sdf,
                        self.rng,
                    )
                    b = bundles[j]
                    sdf_losses.append(model.sdf_head.loss(b["tokens"], b["centers"], b["radii"], queries, targets))
                parts["sdf_aux"] = torch.stack(sdf_losses).mean()

        graph, gt = ds.target_graph(task_id, target_idx, None)
        pred = model.rollout(graph, cond)
        parts["rollout"] = rollout_loss(pred, gt)
        return parts

    def run(self, out_dir) -> TrainResult:
        cfg = self.cfg
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_path = out_dir / "metrics.csv"
        best_path = out_dir / "best.ckpt"
        final_path = out_dir / "final.ckpt"
        norm = {"z_mean": self.ds.z_mean, "z_std": self.ds.z_std, "load_scale": self.ds.load_scale}

        best_val = math.inf
        last_val = math.nan
        with open(metrics_path, "w") as log:
            log.write("step,train_loss,rollout,param_aux,sdf_aux,val_mse\n")
            for step in range(1, cfg.steps + 1):
                self.opt.zero_grad()
                acc = {"rollout": 0.0, "param_aux": 0.0, "sdf_aux": 0.0}
                batch_total = None
                for _ in range(cfg.batch_size):
                    parts = self._sample_losses()
                    sample_total = total_loss(parts, cfg.loss_weights) / cfg.batch_size
                    batch_total = sample_total if batch_total is None else batch_total + sample_total
                    for key in acc:
                        if parts.get(key) is not None:
                            acc[key] += float(parts[key].detach()) / cfg.batch_size
                total_value = float(batch_total.detach())
                if not math.isfinite(total_value):
                    raise FloatingPointError(f"non-finite training loss at step {step}: {acc}")
                batch_total.backward()
                self.opt.step()

                if cfg.val_every and step % cfg.val_every == 0:
                    last_val = validation_mse(self.model, self.ds, "val", cfg.val_context)
                    if last_val < best_val:
                        best_val = last_val
                        save_model(best_path, self.model, norm)
                log.write(
                    f"{step},{total_value:.10e},{acc['rollout']:.10e},"
                    f"{acc['param_aux']:.10e},{acc['sdf_aux']:.10e},{last_val:.10e}\n"
                )

        final_val = validation_mse(self.model, self.ds, "val", cfg.val_context)
        if final_val < best_val:
            best_val = final_val
            save_model(best_path, self.model, norm)
        save_model(final_path, self.model, norm)
        if not best_path.exists():
            save_model(best_path, self.model, norm)
        return TrainResult(final_path, best_path, metrics_path, final_val, best_val)


def train(cfg: TrainConfig, data_dir, out_dir) -> TrainResult:
    """Train one model variant on a generated dataset. Deterministic per seed."""
    splits = ("train", "val")
    ds = load_dataset(data_dir, splits=splits)
    return Trainer(cfg, ds).run(out_dir)
