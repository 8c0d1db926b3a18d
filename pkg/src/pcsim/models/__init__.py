"""Learned components: encoder, context aggregation, trajectory simulator."""

from .checkpoint import blocks_to_module, load_checkpoint, module_to_blocks, save_checkpoint
from .context import ContextAggregator, ParamHead
from .encoder import EncoderConfig, PatchSet, SequenceEncoder, extract_patches, patch_features
from .fourier import FourierConfig, fourier_features
from .simulator import SimGraph, SimulatorConfig, TrajectorySimulator, build_graph, mesh_edges

__all__ = [
    "ContextAggregator",
    "EncoderConfig",
    "FourierConfig",
    "ParamHead",
    "PatchSet",
    "SequenceEncoder",
    "SimGraph",
    "SimulatorConfig",
    "TrajectorySimulator",
    "blocks_to_module",
    "build_graph",
    "extract_patches",
    "fourier_features",
    "load_checkpoint",
    "mesh_edges",
    "module_to_blocks",
    "patch_features",
    "save_checkpoint",
]
