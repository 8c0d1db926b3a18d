"""Dataset loading, normalization, and the end-to-end model containers."""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from ..data import DatasetManifest, read_trajectory
from ..geom import MeshTrajectory, PointCloudFrame, PointCloudSequence, spacetime_lift
from ..models import (
    ContextAggregator,
    EncoderConfig,
    ParamHead,
    SequenceEncoder,
    SimulatorConfig,
    TrajectorySimulator,
    blocks_to_module,
    build_graph,
    extract_patches,
    load_checkpoint,
    module_to_blocks,
    patch_features,
    save_checkpoint,
)
from .sdf_head import SdfHead, SdfHeadConfig

VARIANTS = ("peach", "oracle", "nocontext")


@dataclass
class TrajRecord:
    traj_id: int
    traj: MeshTrajectory
    seq: PointCloudSequence


@dataclass
class TaskRecord:
    task_id: int
    params: dict
    trajectories: list[TrajRecord]


def _f32_exact(arr: np.ndarray) -> np.ndarray:
    """Round to f32 so values survive a checkpoint round trip unchanged."""
    return np.asarray(arr, dtype=np.float32).astype(np.float64)


class LoadedDataset:
    """In-memory dataset with the scene normalization applied lazily.

    Positions map to the unit box via (x - offset) * scale; load features are
    scaled per axis by the train-split maximum magnitude so both force
    components are O(1).
    """

    def __init__(self, manifest: DatasetManifest, splits: tuple[str, ...] = ("train", "val", "test", "ood")):
        self.manifest = manifest
        self.scale = float(manifest.normalization["scale"])
        offset = np.asarray(manifest.normalization["offset"], dtype=np.float64)
        self.offset3 = np.zeros(3)
        self.offset3[: offset.size] = offset
        self.tasks: dict[int, TaskRecord] = {}
        for split in splits:
            for task_id in manifest.splits.get(split, []):
                if task_id not in self.tasks:
                    self.tasks[task_id] = self._load_task(task_id)
        train_ids = [t for t in manifest.splits["train"] if t in self.tasks]
        if not train_ids:
            raise ValueError("dataset has no loadable train tasks")
        self._fit_normalizers(train_ids)

    def _load_task(self, task_id: int) -> TaskRecord:
        params = self.manifest.task_params(task_id)
        records = []
        for i, path in enumerate(self.manifest.trajectory_paths(task_id)):
            traj, seq = read_trajectory(path)
            records.append(TrajRecord(i, traj, seq))
        return TaskRecord(task_id, params, records)

    def _fit_normalizers(self, train_ids: list[int]) -> None:
        raw = np.array(
            [
                [np.log(self.tasks[t].params["E"]), self.tasks[t].params["nu"], np.log(self.tasks[t].params["tau_visc"])]
                for t in train_ids
            ]
        )
        std = raw.std(axis=0)
        self.z_mean = _f32_exact(raw.mean(axis=0))
        self.z_std = _f32_exact(np.where(std > 1e-12, std, 1.0))
        peak = 0.0
        sq_sum, count = 0.0, 0
        for t in train_ids:
            for rec in self.tasks[t].trajectories:
                peak = np.maximum(peak, np.abs(rec.traj.loads).reshape(-1, rec.traj.loads.shape[-1]).max(axis=0))
                disp = self.norm_positions(rec.traj.positions) - self.norm_positions(rec.traj.mesh.rest_positions)[None]
                sq_sum += float((disp**2).sum())
                count += disp.size
        self.load_scale = _f32_exact(np.where(np.asarray(peak) > 0, peak, 1.0))
        # typical displacement magnitude; the simulator decodes in these units
        self.disp_scale = float(_f32_exact(max(np.sqrt(sq_sum / max(count, 1)), 1e-9)))

    # -- normalization helpers -------------------------------------------
    def split_ids(self, split: str) -> list[int]:
        return [t for t in self.manifest.splits[split] if t in self.tasks]

    def params_z(self, task_id: int) -> np.ndarray:
        p = self.tasks[task_id].params
        raw = np.array([np.log(p["E"]), p["nu"], np.log(p["tau_visc"])])
        return (raw - self.z_mean) / self.z_std

    def params_raw(self, task_id: int) -> tuple[float, float, float]:
        p = self.tasks[task_id].params
        return p["E"], p["nu"], p["tau_visc"]

    def norm_positions(self, positions: np.ndarray) -> np.ndarray:
        d = positions.shape[-1]
        return (positions - self.offset3[:d]) * self.scale

    def norm_sequence(self, seq: PointCloudSequence) -> PointCloudSequence:
        frames = [PointCloudFrame(self.norm_positions(f.positions), f.object_label) for f in seq.frames]
        return PointCloudSequence(frames, seq.frame_dt)

    def norm_loads(self, loads: np.ndarray) -> np.ndarray:
        return loads / self.load_scale

    def target_graph(self, task_id: int, traj_idx: int, cond: np.ndarray | None, dtype=torch.float32):
        rec = self.tasks[task_id].trajectories[traj_idx]
        rest_norm = self.norm_positions(rec.traj.mesh.rest_positions)
        graph = build_graph(
            rec.traj.mesh,
            self.norm_loads(rec.traj.loads),
            cond,
            rec.traj.n_steps,
            rest_norm,
            dtype=dtype,
        )
        gt = torch.as_tensor(self.norm_positions(rec.traj.positions), dtype=dtype)
        return graph, gt

    @property
    def rollout_frames(self) -> int:
        first = next(iter(self.tasks.values()))
        return first.trajectories[0].traj.n_steps

    @property
    def spatial_dim(self) -> int:
        first = next(iter(self.tasks.values()))
        return first.trajectories[0].traj.mesh.dim

    @property
    def frame_stride(self) -> int:
        return int(self.manifest.observation["stride"])


@dataclass
class ModelConfig:
    variant: str = "peach"
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    sdf: SdfHeadConfig = field(default_factory=SdfHeadConfig)
    mp_blocks: int = 15
    time_dim: int = 16
    conv_kernel: int = 5
    per_dim_beta: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")

    def cond_dim(self) -> int:
        return {"peach": self.encoder.latent_dim, "oracle": 3, "nocontext": 0}[self.variant]


class SimulationModel(nn.Module):
    """Simulator plus (for the in-context variant) encoder and aux heads."""

    def __init__(self, cfg: ModelConfig, rollout_frames: int, spatial_dim: int):
        super().__init__()
        self.cfg = cfg
        self.variant = cfg.variant
        sim_cfg = SimulatorConfig(
            latent_dim=cfg.encoder.latent_dim,
            mp_blocks=cfg.mp_blocks,
            time_dim=cfg.time_dim,
            conv_kernel=cfg.conv_kernel,
            cond_dim=cfg.cond_dim(),
            spatial_dim=spatial_dim,
            rollout_frames=rollout_frames,
        )
        self.simulator = TrajectorySimulator(sim_cfg)
        if cfg.variant == "peach":
            self.encoder = SequenceEncoder(cfg.encoder)
            self.aggregator = ContextAggregator(cfg.encoder.latent_dim, per_dim_beta=cfg.per_dim_beta)
            self.param_head = ParamHead(cfg.encoder.latent_dim)
            self.sdf_head = SdfHead(cfg.encoder, cfg.sdf)

    def encode_sequence(self, seq_norm: PointCloudSequence, rng=None, start: int | None = None):
        """Latent code and token bundle for one normalized sequence."""
        lifted = spacetime_lift(seq_norm, self.cfg.encoder.tau)
        patches = extract_patches(
            lifted,
            ratio=self.cfg.encoder.fps_ratio,
            patch_size=self.cfg.encoder.patch_size,
            rng=rng,
            start=0 if (start is None and rng is None) else start,
        )
        feats = patch_features(lifted, patches, self.cfg.encoder)
        dtype = next(self.encoder.parameters()).dtype
        member = torch.as_tensor(feats["member_feats"], dtype=dtype)
        center = torch.as_tensor(feats["center_feats"], dtype=dtype)
        latent, tokens = self.encoder(member, center)
        return latent, {"tokens": tokens, "centers": feats["centers"], "radii": feats["radii"]}

    def encode_context(self, seqs_norm: list[PointCloudSequence], rng=None):
        latents, bundles = [], []
        for seq in seqs_norm:
            latent, bundle = self.encode_sequence(seq, rng=rng)
            latents.append(latent)
            bundles.append(bundle)
        stack = torch.stack(latents)
        return self.aggregator(stack), stack, bundles

    def rollout(self, graph, cond: torch.Tensor | None = None) -> torch.Tensor:
        """Roll out the simulator, appending the conditioning vector (if any)
        to the raw node features so gradients reach the encoder."""
        if cond is not None:
            t, v, _ = graph.node_raw.shape
            node = torch.cat(
                [graph.node_raw, cond.to(graph.node_raw.dtype)[None, None, :].expand(t, v, -1)], dim=-1
            )
            graph = dataclasses.replace(graph, node_raw=node)
        return self.simulator(graph)


def save_model(path, model: SimulationModel, norm: dict[str, np.ndarray]) -> None:
    blocks = module_to_blocks(model)
    for k, v in norm.items():
        blocks[f"norm.{k}"] = np.asarray(v)
    save_checkpoint(path, blocks)


def load_model(path, cfg: ModelConfig | None = None) -> tuple[SimulationModel, dict[str, np.ndarray]]:
    """Rebuild a model from a checkpoint.

    Everything shape-bearing (variant, rollout length, latent width, block
    count, Fourier bands, ...) is inferred from the stored block shapes;
    pure hyperparameters without a weight footprint (patch size, FPS ratio,
    tau, attention heads, wavelength bounds) come from `cfg`, defaulting to
    the standard configuration the CLI trains with.
    """
    blocks = load_checkpoint(path)
    norm = {k.split(".", 1)[1]: v.astype(np.float64) for k, v in blocks.items() if k.startswith("norm.")}
    model_blocks = {k: v for k, v in blocks.items() if not k.startswith("norm.")}

    rollout_frames, time_dim = blocks["simulator.time_embed"].shape
    spatial_dim, latent_dim = blocks["simulator.decoder.weight"].shape
    node_in = blocks["simulator.node_proj.weight"].shape[1]
    cond_dim = node_in - 3 - spatial_dim - time_dim
    variant = {0: "nocontext", 3: "oracle"}.get(int(cond_dim), "peach")
    mp_blocks = 1 + max(
        int(k.split(".")[2]) for k in model_blocks if k.startswith("simulator.mp_blocks.")
    )
    conv_kernel = blocks["simulator.temporal_blocks.0.conv1.weight"].shape[2]

    if cfg is None:
        cfg = ModelConfig(variant=variant)
    encoder = dataclasses.replace(cfg.encoder, latent_dim=int(latent_dim))
    if variant == "peach":
        member_in = blocks["encoder.tokenizer.stage1.fc1.weight"].shape[1]
        bands = (member_in - encoder.n_object_types) // 8
        encoder = dataclasses.replace(
            encoder,
            fourier=dataclasses.replace(cfg.encoder.fourier, bands=int(bands)),
            ff_width=int(blocks["encoder.transformer.ff.fc1.weight"].shape[0]),
        )
    cfg = ModelConfig(
        variant=variant,
        encoder=encoder,
        sdf=cfg.sdf,
        mp_blocks=int(mp_blocks),
        time_dim=int(time_dim),
        conv_kernel=int(conv_kernel),
        per_dim_beta=cfg.per_dim_beta,
    )
    model = SimulationModel(cfg, rollout_frames=int(rollout_frames), spatial_dim=int(spatial_dim))
    blocks_to_module(model, model_blocks)
    return model, norm


def load_dataset(data_dir, splits=("train", "val", "test", "ood")) -> LoadedDataset:
    return LoadedDataset(DatasetManifest.load(Path(data_dir)), splits=splits)
