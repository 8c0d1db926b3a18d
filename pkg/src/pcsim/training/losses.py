"""Training objectives: rollout MSE, parameter regression, weighted total."""

from dataclasses import dataclass

import torch


@dataclass
class LossWeights:
    rollout: float = 1.0
    param_aux: float = 0.02
    sdf_aux: float = 0.5

    def __post_init__(self):
        if min(self.rollout, self.param_aux, self.sdf_aux) < 0:
            raise ValueError("loss weights must be non-negative")


def rollout_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Sum over time of the per-step MSE over nodes and dimensions."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return ((pred - target) ** 2).mean(dim=(1, 2)).sum()


def param_aux_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return ((pred - target) ** 2).mean()


def smooth_l1(err: torch.Tensor) -> torch.Tensor:
    """Elementwise smooth-l1: e^2/2 for |e| <= 1, |e| - 1/2 beyond."""
    abs_err = err.abs()
    return torch.where(abs_err <= 1.0, 0.5 * err**2, abs_err - 0.5)


def total_loss(parts: dict[str, torch.Tensor | None], weights: LossWeights) -> torch.Tensor:
    """Weighted sum of the enabled loss parts (missing/None parts contribute 0)."""
    total = weights.rollout * parts["rollout"]
    if parts.get("param_aux") is not None:
        total = total + weights.param_aux * parts["param_aux"]
    if parts.get("sdf_aux") is not None:
        total = total + weights.sdf_aux * parts["sdf_aux"]
    return total
