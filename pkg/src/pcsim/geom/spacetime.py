"""Lifting of point cloud sequences into 4D space-time."""

from dataclasses import dataclass

import numpy as np

from .types import PointCloudSequence


@dataclass
class SpaceTimePoint:
    """A single (x, y, z, t~) coordinate with its source (frame, point)."""

    coords: np.ndarray
    frame: int
    point: int


@dataclass
class LiftedSequence:
    """Flat 4D view of a sequence: coords (N, 4) plus back-references."""

    coords: np.ndarray
    labels: np.ndarray
    frame_idx: np.ndarray
    point_idx: np.ndarray
    tau: float

    def __len__(self) -> int:
        return self.coords.shape[0]


def spacetime_lift(seq: PointCloudSequence, tau: float) -> LiftedSequence:
    """Embed a sequence as one 4D point set.

    The time coordinate of frame i is tau * i / (T - 1): sequence duration is
    normalized to [0, 1] and scaled by tau, so tau = 0 collapses the time
    axis. A single-frame sequence maps to t~ = 0.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    pos, lab = seq.stacked()
    t, p, dim = pos.shape
    coords = np.zeros((t * p, 4), dtype=np.float64)
    coords[:, :dim] = pos.reshape(t * p, dim)
    if t > 1:
        times = tau * np.arange(t, dtype=np.float64) / (t - 1)
    else:
        times = np.zeros(1)
    coords[:, 3] = np.repeat(times, p)
    frame_idx = np.repeat(np.arange(t, dtype=np.int64), p)
    point_idx = np.tile(np.arange(p, dtype=np.int64), t)
    return LiftedSequence(coords, lab.reshape(-1).copy(), frame_idx, point_idx, float(tau))
