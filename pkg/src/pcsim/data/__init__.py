"""Synthetic task/trajectory generation for the bending-beam scene."""

from .augment import AugmentConfig, augment, drop_ball
from .beam_mesh import triangulate_beam
from .dataset import DatasetConfig, ObservationConfig, build_dataset, make_observation
from .fem import KelvinVoigtSolver, plane_strain_lame, simulate_beam
from .io import DatasetManifest, read_trajectory, write_trajectory
from .params import BeamGeometry, ParamRanges, PhysicalParams, Task, TaskSkeleton, sample_task
from .schedule import ForceSchedule, sample_schedule

__all__ = [
    "AugmentConfig",
    "BeamGeometry",
    "DatasetConfig",
    "DatasetManifest",
    "ForceSchedule",
    "KelvinVoigtSolver",
    "ObservationConfig",
    "ParamRanges",
    "PhysicalParams",
    "Task",
    "TaskSkeleton",
    "augment",
    "build_dataset",
    "drop_ball",
    "make_observation",
    "plane_strain_lame",
    "read_trajectory",
    "sample_schedule",
    "sample_task",
    "simulate_beam",
    "triangulate_beam",
    "write_trajectory",
]
