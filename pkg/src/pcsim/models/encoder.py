"""Spatio-temporal point cloud sequence encoder.

A sequence is lifted to 4D space-time, split into FPS/kNN patches, tokenized
by a two-stage mini point network (t = shape + center embedding), refined by
a single pre-norm transformer layer, and compressed to one latent by
attention pooling with a learned query.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..errors import SizeError
from ..geom import LiftedSequence, knn_batch
from ..geom.kernels import farthest_point_sample
from .fourier import FourierConfig, fourier_features


@dataclass
class EncoderConfig:
    latent_dim: int = 128
    fps_ratio: float = 0.1
    patch_size: int = 16
    tau: float = 16.0
    heads: int = 4
    ff_width: int = 256
    n_object_types: int = 2
    fourier: FourierConfig = field(default_factory=FourierConfig)

    @property
    def member_feat_dim(self) -> int:
        return 4 * self.fourier.features_per_coord + self.n_object_types

    @property
    def center_feat_dim(self) -> int:
        return 4 * self.fourier.features_per_coord


@dataclass
class PatchSet:
    center_idx: np.ndarray  # (M,)
    member_idx: np.ndarray  # (M, patch_size)
    centers: np.ndarray  # (M, 4)
    radii: np.ndarray  # (M,) distance to the farthest member


def extract_patches(
    lifted: LiftedSequence,
    ratio: float = 0.1,
    patch_size: int = 16,
    rng=None,
    start: int | None = None,
) -> PatchSet:
    """FPS patch centers in 4D plus their exact kNN member sets."""
    coords = lifted.coords
    n = coords.shape[0]
    if n < patch_size:
        raise SizeError(f"need at least patch_size={patch_size} lifted points, got {n}")
    m = int(math.ceil(ratio * n))
    m = max(1, min(m, n))
    center_idx = farthest_point_sample(coords, m, start=start, rng=rng)
    centers = coords[center_idx]
    member_idx = knn_batch(centers, coords, patch_size)
    rel = coords[member_idx] - centers[:, None, :]
    radii = np.sqrt(np.einsum("msd,msd->ms", rel, rel)).max(axis=1)
    return PatchSet(center_idx, member_idx, centers, radii)


def patch_features(lifted: LiftedSequence, patches: PatchSet, cfg: EncoderConfig) -> dict:
    """NumPy feature blocks consumed by the encoder module.

    Member features are Fourier encodings of center-relative 4D offsets plus
    an object-type one-hot; center features encode the absolute position.
    """
    rel = lifted.coords[patches.member_idx] - patches.centers[:, None, :]
    member_four = fourier_features(rel, cfg.fourier)
    labels = lifted.labels[patches.member_idx]
    onehot = np.eye(cfg.n_object_types, dtype=np.float64)[labels]
    member = np.concatenate([member_four, onehot], axis=-1)
    center = fourier_features(patches.centers, cfg.fourier)
    return {
        "member_feats": member,
        "center_feats": center,
        "centers": patches.centers,
        "radii": patches.radii,
    }


class _Mlp(nn.Module):
    def __init__(self, d_in, d_hidden, d_out):
        super().__init__()
        self.fc1 = nn.Linear(d_in, d_hidden)
        self.fc2 = nn.Linear(d_hidden, d_out)
        self.act = nn.GELU()

    def forward(self, x):
        return self.fc2(self.act(self.fc1(x)))


class PatchTokenizer(nn.Module):
    """Two-stage point network with max-pooling (shape embedding s)."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        d = cfg.latent_dim
        self.stage1 = _Mlp(cfg.member_feat_dim, d, d)
        self.stage2 = _Mlp(2 * d, d, d)

    def forward(self, member_feats):  # (M, S, F)
        per_point = self.stage1(member_feats)
        pooled = per_point.max(dim=1, keepdim=True).values
        combined = torch.cat([pooled.expand_as(per_point), per_point], dim=-1)
        return self.stage2(combined).max(dim=1).values  # (M, d)


class TransformerLayer(nn.Module):
    """Single pre-norm self-attention + feed-forward block."""

    def __init__(self, dim: int, heads: int, ff_width: int):
        super().__init__()
        if dim % heads:
            raise ValueError("latent_dim must be divisible by heads")
        self.heads = heads
        self.norm1 = nn.LayerNorm(dim)
        self.norm2 = nn.LayerNorm(dim)
        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)
        self.ff = _Mlp(dim, ff_width, dim)

    def forward(self, x):  # (M, d)
        m, d = x.shape
        h = self.heads
        q, k, v = self.qkv(self.norm1(x)).reshape(m, 3, h, d // h).permute(1, 2, 0, 3)
        attn = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(d // h), dim=-1)
        x = x + self.proj((attn @ v).transpose(0, 1).reshape(m, d))
        return x + self.ff(self.norm2(x))


class AttentionPool(nn.Module):
    """Learned-query attention over tokens -> one output vector."""

    def __init__(self, dim: int):
        super().__init__()
        self.query = nn.Parameter(torch.randn(dim) / math.sqrt(dim))
        self.key = nn.Linear(dim, dim)
        self.value = nn.Linear(dim, dim)
        self.out = nn.Linear(dim, dim)

    def forward(self, tokens):  # (M, d)
        d = tokens.shape[-1]
        w = torch.softmax(self.key(tokens) @ self.query / math.sqrt(d), dim=0)
        return self.out((w[:, None] * self.value(tokens)).sum(dim=0))


class SequenceEncoder(nn.Module):
    """Maps patch features of one sequence to its latent code r_c."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        d = cfg.latent_dim
        self.tokenizer = PatchTokenizer(cfg)
        self.center_embed = _Mlp(cfg.center_feat_dim, d, d)
        self.transformer = TransformerLayer(d, cfg.heads, cfg.ff_width)
        self.pool = AttentionPool(d)

    def tokens(self, member_feats, center_feats):
        return self.tokenizer(member_feats) + self.center_embed(center_feats)

    def forward(self, member_feats, center_feats):
        tokens = self.tokens(member_feats, center_feats)
        return self.pool(self.transformer(tokens)), tokens
