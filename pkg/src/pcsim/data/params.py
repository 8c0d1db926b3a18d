"""Physical parameter and geometry sampling for the bending-beam scene."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PhysicalParams:
    """One material configuration: elastic modulus, Poisson ratio, viscosity time."""

    youngs_modulus: float
    poisson_ratio: float
    tau_visc: float

    def __post_init__(self):
        if self.youngs_modulus <= 0:
            raise ValueError("youngs_modulus must be positive")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ValueError("poisson_ratio must lie in [0, 0.5)")
        if self.tau_visc <= 0:
            raise ValueError("tau_visc must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.youngs_modulus, self.poisson_ratio, self.tau_visc])


@dataclass
class BeamGeometry:
    height: float
    length: float
    mesh_h: float

    def __post_init__(self):
        if min(self.height, self.length, self.mesh_h) <= 0:
            raise ValueError("geometry values must be positive")
        if self.length <= self.height:
            raise ValueError("length must exceed height")


@dataclass
class ParamRanges:
    """Sampling distributions; (lo, hi) bounds or (mean, std) for normals."""

    youngs_modulus: tuple[float, float] = (0.5, 5.0)  # log-uniform
    poisson_ratio: tuple[float, float] = (0.0, 0.45)  # uniform
    tau_visc: tuple[float, float] = (0.05, 0.5)  # log-uniform
    height: tuple[float, float] = (0.3, 0.01)  # normal
    length: tuple[float, float] = (10.0, 1.0)  # normal
    mesh_h: tuple[float, float] = (0.2, 0.02)  # normal
    force_horizontal: float = 1.0e-7  # uniform in +/- this
    force_vertical: float = 3.0e-5

    def to_dict(self) -> dict:
        return {
            "youngs_modulus": list(self.youngs_modulus),
            "poisson_ratio": list(self.poisson_ratio),
            "tau_visc": list(self.tau_visc),
            "height": list(self.height),
            "length": list(self.length),
            "mesh_h": list(self.mesh_h),
            "force_horizontal": self.force_horizontal,
            "force_vertical": self.force_vertical,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParamRanges":
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)


@dataclass
class TaskSkeleton:
    task_id: int
    params: PhysicalParams
    geometry: BeamGeometry


@dataclass
class Task:
    task_id: int
    params: PhysicalParams
    geometry: BeamGeometry
    trajectories: list = field(default_factory=list)


def _log_uniform(rng, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _positive_normal(rng, mean: float, std: float) -> float:
    for _ in range(100):
        v = float(rng.normal(mean, std))
        if v > 0:
            return v
    raise ValueError(f"could not draw a positive value from N({mean}, {std})")


def sample_params(rng, ranges: ParamRanges) -> PhysicalParams:
    return PhysicalParams(
        youngs_modulus=_log_uniform(rng, *ranges.youngs_modulus),
        poisson_ratio=float(rng.uniform(*ranges.poisson_ratio)),
        tau_visc=_log_uniform(rng, *ranges.tau_visc),
    )


def sample_geometry(rng, ranges: ParamRanges) -> BeamGeometry:
    for _ in range(100):
        h = _positive_normal(rng, *ranges.height)
        length = _positive_normal(rng, *ranges.length)
        mesh_h = _positive_normal(rng, *ranges.mesh_h)
        if length > h and mesh_h < min(length, h):
            return BeamGeometry(height=h, length=length, mesh_h=mesh_h)
    raise ValueError("could not sample a consistent beam geometry")


def sample_task(rng, ranges: ParamRanges, task_id: int = 0) -> TaskSkeleton:
    """Draw one task skeleton (parameters + geometry, no trajectories yet)."""
    return TaskSkeleton(task_id=task_id, params=sample_params(rng, ranges), geometry=sample_geometry(rng, ranges))
