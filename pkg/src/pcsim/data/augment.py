"""Training-time point cloud corruptions mimicking real sensor artifacts."""

from dataclasses import dataclass, field

import numpy as np

from ..geom import LABEL_DEFORMABLE, PointCloudFrame, PointCloudSequence


@dataclass
class AugmentConfig:
    """Applied in order: multi-scale jitter, region dropout, artifact points."""

    jitter_scales: tuple[float, ...] = ()
    dropout_balls: int = 0
    dropout_radius: float = 0.1
    artifacts: int = 0

    def __post_init__(self):
        if any(s < 0 for s in self.jitter_scales) or self.dropout_radius < 0:
            raise ValueError("scales must be non-negative")
        if self.dropout_balls < 0 or self.artifacts < 0:
            raise ValueError("counts must be non-negative")


def drop_ball(positions: np.ndarray, labels: np.ndarray, center: np.ndarray, radius: float, rng):
    """Remove points inside the ball, then resample survivors with
    replacement back to the original count."""
    keep = np.linalg.norm(positions - center, axis=1) > radius
    if keep.all() or not keep.any():
        return positions, labels
    survivors = np.flatnonzero(keep)
    refill = rng.choice(survivors, size=len(positions) - len(survivors), replace=True)
    idx = np.concatenate([survivors, refill])
    return positions[idx], labels[idx]


def scene_bounding_box(seq: PointCloudSequence) -> tuple[np.ndarray, np.ndarray]:
    pos, _ = seq.stacked()
    flat = pos.reshape(-1, pos.shape[-1])
    return flat.min(axis=0), flat.max(axis=0)


def augment(seq: PointCloudSequence, cfg: AugmentConfig, rng) -> PointCloudSequence:
    """Jitter, structured region dropout, and uniform artifact injection.

    Dropout restores each frame's point count by resampling survivors;
    artifact injection appends `cfg.artifacts` extra points per frame, so the
    output has points_per_frame + artifacts points in every frame.
    """
    lo, hi = scene_bounding_box(seq)
    frames = []
    for frame in seq.frames:
        pos = frame.positions.copy()
        lab = frame.object_label.copy()

        for sigma in cfg.jitter_scales:
            if sigma > 0:
                pos += rng.normal(0.0, sigma, size=pos.shape)

        pad = cfg.dropout_radius
        for _ in range(cfg.dropout_balls):
            center = rng.uniform(lo - pad, hi + pad)
            pos, lab = drop_ball(pos, lab, center, cfg.dropout_radius, rng)

        if cfg.artifacts > 0:
            extra = rng.uniform(lo, hi, size=(cfg.artifacts, pos.shape[1]))
            pos = np.concatenate([pos, extra])
            lab = np.concatenate([lab, np.full(cfg.artifacts, LABEL_DEFORMABLE, dtype=np.uint8)])

        frames.append(PointCloudFrame(pos, lab))
    return PointCloudSequence(frames, seq.frame_dt)
