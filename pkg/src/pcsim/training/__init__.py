"""Losses, auxiliary heads, the optimization loop, and gradient checks."""

from .gradcheck import COMPONENTS, GradCheckReport, grad_check, grad_check_all
from .loop import TrainConfig, Trainer, TrainResult, task_condition, train, validation_mse
from .losses import LossWeights, param_aux_loss, rollout_loss, smooth_l1, total_loss
from .pipeline import (
    LoadedDataset,
    ModelConfig,
    SimulationModel,
    load_dataset,
    load_model,
    save_model,
)
from .sdf_head import SdfHead, SdfHeadConfig, sample_sdf_queries

__all__ = [
    "COMPONENTS",
    "GradCheckReport",
    "LoadedDataset",
    "LossWeights",
    "ModelConfig",
    "SdfHead",
    "SdfHeadConfig",
    "SimulationModel",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "grad_check",
    "grad_check_all",
    "load_dataset",
    "load_model",
    "param_aux_loss",
    "rollout_loss",
    "sample_sdf_queries",
    "save_model",
    "smooth_l1",
    "task_condition",
    "total_loss",
    "train",
    "validation_mse",
]
