"""Trajectory-level graph network simulator.

One static graph carries time-indexed node and edge feature tensors; K
message-passing blocks (spatial, per time step) interleave with 1D residual
convolutions (temporal, per node), and a decoder emits per-step displacements
from rest.
"""

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from ..errors import NumericError
from ..geom import Mesh


@dataclass
class SimulatorConfig:
    latent_dim: int = 128
    mp_blocks: int = 15
    time_dim: int = 16
    conv_kernel: int = 5
    cond_dim: int = 128  # 128 latent / 3 oracle / 0 no-context
    spatial_dim: int = 2
    n_node_types: int = 3
    rollout_frames: int = 25

    @property
    def node_in_dim(self) -> int:
        return self.n_node_types + self.spatial_dim + self.cond_dim + self.time_dim


@dataclass
class SimGraph:
    """Static graph with raw per-time node features and geometric edge features."""

    node_raw: torch.Tensor  # (T, V, node_in_dim - time_dim)
    edge_raw: torch.Tensor  # (E, spatial_dim + 1)
    senders: torch.Tensor  # (E,)
    receivers: torch.Tensor  # (E,)
    inv_degree: torch.Tensor  # (V, 1) 1/|incident edges|, 0 for isolated nodes
    rest: torch.Tensor  # (V, dim) normalized rest positions
    clamped: torch.Tensor  # (V,) bool

    @property
    def n_frames(self) -> int:
        return self.node_raw.shape[0]


def mesh_edges(cells: np.ndarray) -> np.ndarray:
    """(E, 2) directed edges: both directions of every unique mesh edge."""
    e = np.concatenate([cells[:, [0, 1]], cells[:, [1, 2]], cells[:, [2, 0]]])
    und = np.unique(np.sort(e, axis=1), axis=0)
    return np.concatenate([und, und[:, ::-1]], axis=0)


def build_graph(
    mesh: Mesh,
    loads_feat: np.ndarray,
    cond: np.ndarray | None,
    rollout_frames: int,
    rest_norm: np.ndarray,
    dtype=torch.float32,
) -> SimGraph:
    """Assemble raw graph tensors for one target trajectory.

    Raw node features at (t, v) are [node-type one-hot, load(t, v), cond];
    the learned time embedding is concatenated inside the simulator before
    projection. Edge features are the rest-state relative positions plus
    their norm, shared across time.
    """
    t, v, dim = loads_feat.shape
    if t != rollout_frames:
        raise ValueError(f"loads cover {t} frames, expected {rollout_frames}")
    onehot = np.eye(3, dtype=np.float64)[mesh.node_type]
    parts = [np.broadcast_to(onehot, (t, v, 3)), loads_feat]
    if cond is not None and cond.size:
        parts.append(np.broadcast_to(cond, (t, v, cond.size)))
    node_raw_np = np.concatenate(parts, axis=-1)
    node_raw = torch.as_tensor(np.ascontiguousarray(node_raw_np), dtype=dtype)

    edges = mesh_edges(mesh.cells)
    rel = rest_norm[edges[:, 1]] - rest_norm[edges[:, 0]]
    edge_raw_np = np.concatenate([rel, np.linalg.norm(rel, axis=1, keepdims=True)], axis=1)
    edge_raw = torch.as_tensor(edge_raw_np, dtype=dtype)

    receivers = torch.as_tensor(edges[:, 1])
    degree = torch.zeros(v, dtype=dtype).index_add_(0, receivers, torch.ones(len(edges), dtype=dtype))
    inv_degree = torch.where(degree > 0, 1.0 / degree, torch.zeros(())).unsqueeze(1).to(dtype)

    return SimGraph(
        node_raw=node_raw,
        edge_raw=edge_raw,
        senders=torch.as_tensor(edges[:, 0]),
        receivers=receivers,
        inv_degree=inv_degree,
        rest=torch.as_tensor(rest_norm, dtype=dtype),
        clamped=torch.as_tensor(mesh.node_type == 1),
    )


class _Mlp(nn.Module):
    """Pre-norm two-layer leaky-ReLU MLP: residual updates can stay small."""

    def __init__(self, d_in, d_out):
        super().__init__()
        self.norm = nn.LayerNorm(d_in)
        self.fc1 = nn.Linear(d_in, d_out)
        self.fc2 = nn.Linear(d_out, d_out)
        self.act = nn.LeakyReLU()

    def forward(self, x):
        return self.fc2(self.act(self.fc1(self.norm(x))))


class MessagePassingBlock(nn.Module):
    """Edge then node update with mean aggregation, residual on both.

    Residual updates are scaled by zero-initialized gates so the untrained
    stack is the identity on top of the input projections; blocks switch on
    as training demands capacity.
    """

    def __init__(self, dim: int):
        super().__init__()
        self.edge_fn = _Mlp(3 * dim, dim)
        self.node_fn = _Mlp(2 * dim, dim)
        self.edge_gate = nn.Parameter(torch.zeros(()))
        self.node_gate = nn.Parameter(torch.zeros(()))

    def forward(self, m_v, m_e, graph: SimGraph):
        upd = self.edge_fn(torch.cat([m_e, m_v[:, graph.senders], m_v[:, graph.receivers]], dim=-1))
        m_e = m_e + self.edge_gate * upd
        agg = torch.zeros_like(m_v).index_add_(1, graph.receivers, m_e) * graph.inv_degree
        m_v = m_v + self.node_gate * self.node_fn(torch.cat([m_v, agg], dim=-1))
        return m_v, m_e


class TemporalBlock(nn.Module):
    """Per-node residual 1D CNN along time; identity at initialization."""

    def __init__(self, dim: int, kernel: int):
        super().__init__()
        pad = kernel // 2
        self.conv1 = nn.Conv1d(dim, dim, kernel, padding=pad)
        self.conv2 = nn.Conv1d(dim, dim, kernel, padding=pad)
        self.act = nn.LeakyReLU()
        nn.init.zeros_(self.conv2.weight)
        nn.init.zeros_(self.conv2.bias)

    def forward(self, m_v):  # (T, V, d)
        x = m_v.permute(1, 2, 0)  # (V, d, T)
        delta = self.conv2(self.act(self.conv1(x)))
        return m_v + delta.permute(2, 0, 1)


class TrajectorySimulator(nn.Module):
    def __init__(self, cfg: SimulatorConfig):
        super().__init__()
        self.cfg = cfg
        d = cfg.latent_dim
        self.time_embed = nn.Parameter(torch.randn(cfg.rollout_frames, cfg.time_dim))
        self.node_proj = nn.Linear(cfg.node_in_dim, d)
        self.edge_proj = nn.Linear(cfg.spatial_dim + 1, d)
        self.mp_blocks = nn.ModuleList(MessagePassingBlock(d) for _ in range(cfg.mp_blocks))
        self.temporal_blocks = nn.ModuleList(TemporalBlock(d, cfg.conv_kernel) for _ in range(cfg.mp_blocks))
        self.decoder = nn.Linear(d, cfg.spatial_dim)
        # displacements are decoded in units of the dataset's typical
        # displacement magnitude (set by the trainer, stored in checkpoints)
        self.register_buffer("disp_scale", torch.ones(()))

    def forward(self, graph: SimGraph) -> torch.Tensor:
        """Full rollout: (T, V, dim) predicted positions."""
        t, v, _ = graph.node_raw.shape
        time = self.time_embed[:, None, :].expand(t, v, self.cfg.time_dim)
        m_v = self.node_proj(torch.cat([graph.node_raw, time], dim=-1))
        m_e = self.edge_proj(graph.edge_raw)[None].expand(t, -1, -1).contiguous()
        for k, (mp, temporal) in enumerate(zip(self.mp_blocks, self.temporal_blocks)):
            m_v, m_e = mp(m_v, m_e, graph)
            m_v = temporal(m_v)
            if not torch.isfinite(m_v).all():
                raise NumericError(f"non-finite node features after block {k}")
        disp = self.decoder(m_v) * self.disp_scale
        positions = graph.rest[None] + disp
        positions = positions.clone()
        positions[:, graph.clamped] = graph.rest[graph.clamped][None].to(positions.dtype)
        return positions
