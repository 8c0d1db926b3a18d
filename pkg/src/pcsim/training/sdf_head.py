"""Auxiliary SDF reconstruction head over patch tokens.

Query points lifted to 4D attend over their nearest patch tokens; an
attention MLP scores each neighbor (biased toward spatio-temporally close
patches) and a small decoder predicts the tanh-squashed signed distance.
"""

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from ..errors import SizeError
from ..geom import Boundary2D, knn_batch, sdf_target
from ..models.encoder import EncoderConfig, _Mlp
from ..models.fourier import fourier_features
from .losses import smooth_l1


@dataclass
class SdfHeadConfig:
    k_neighbors: int = 8
    alpha: float = 10.0
    queries_per_frame: int = 128
    frames_per_sequence: int = 4
    near_surface_fraction: float = 0.5
    near_surface_sigma: float = 0.05
    bbox_pad: float = 0.1

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


class SdfHead(nn.Module):
    def __init__(self, enc_cfg: EncoderConfig, cfg: SdfHeadConfig):
        super().__init__()
        self.enc_cfg = enc_cfg
        self.cfg = cfg
        feat = enc_cfg.latent_dim + enc_cfg.center_feat_dim
        self.attn_mlp = _Mlp(feat, 64, 1)
        self.decoder = _Mlp(feat, enc_cfg.latent_dim, 1)

    def predict(self, tokens, centers, radii, queries_4d) -> torch.Tensor:
        """Predicted tanh-SDF values at the query points, (Q,)."""
        if tokens.shape[0] < self.cfg.k_neighbors:
            raise SizeError(f"need at least {self.cfg.k_neighbors} tokens, got {tokens.shape[0]}")
        neigh = knn_batch(queries_4d, centers, self.cfg.k_neighbors)  # (Q, K)
        rel = queries_4d[:, None, :] - centers[neigh]  # (Q, K, 4)
        dist = np.sqrt(np.einsum("qkd,qkd->qk", rel, rel))
        bias = dist / np.maximum(radii[neigh], 1e-9)
        rel_enc = fourier_features(rel, self.enc_cfg.fourier)

        dtype = tokens.dtype
        feats = torch.cat([tokens[torch.as_tensor(neigh)], torch.as_tensor(rel_enc, dtype=dtype)], dim=-1)
        logits = self.attn_mlp(feats).squeeze(-1) - torch.as_tensor(bias, dtype=dtype)
        weights = torch.softmax(logits, dim=1)
        pooled = (weights[:, :, None] * feats).sum(dim=1)
        return self.decoder(pooled).squeeze(-1)

    def loss(self, tokens, centers, radii, queries_4d, targets) -> torch.Tensor:
        pred = self.predict(tokens, centers, radii, queries_4d)
        return smooth_l1(pred - torch.as_tensor(targets, dtype=pred.dtype)).mean()


def sample_sdf_queries(
    positions_norm: np.ndarray,
    cells: np.ndarray,
    pc_frame_count: int,
    frame_stride: int,
    tau: float,
    cfg: SdfHeadConfig,
    rng,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw query points and tanh-SDF targets from a normalized trajectory.

    Half the queries sit near the deformed boundary (surface samples plus a
    Gaussian offset), half are uniform over the padded scene bounding box.
    Queries carry the space-time coordinate of their point-cloud frame.
    """
    n_frames = min(cfg.frames_per_sequence, pc_frame_count)
    frame_ids = np.sort(rng.choice(pc_frame_count, size=n_frames, replace=False))
    lo = positions_norm.min(axis=(0, 1))
    hi = positions_norm.max(axis=(0, 1))
    span = hi - lo
    lo_pad = lo - cfg.bbox_pad * span
    hi_pad = hi + cfg.bbox_pad * span

    queries = []
    targets = []
    q = cfg.queries_per_frame
    n_near = int(round(q * cfg.near_surface_fraction))
    for fi in frame_ids:
        mesh_frame = min(fi * frame_stride, positions_norm.shape[0] - 1)
        boundary = Boundary2D(positions_norm[mesh_frame], cells)
        near = boundary.sample_uniform(n_near, rng) + rng.normal(0.0, cfg.near_surface_sigma, size=(n_near, 2))
        unif = rng.uniform(lo_pad, hi_pad, size=(q - n_near, 2))
        pts2 = np.concatenate([near, unif])
        s = sdf_target(boundary.signed_distance(pts2), cfg.alpha)
        t_coord = tau * fi / max(pc_frame_count - 1, 1)
        q4 = np.zeros((q, 4))
        q4[:, :2] = pts2
        q4[:, 3] = t_coord
        queries.append(q4)
        targets.append(s)
    return np.concatenate(queries), np.concatenate(targets)
