import pathlib
import sys

import numpy as np
import pytest

SRC = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def unit_square():
    """Unit square as two triangles; the standard 2D SDF test geometry."""
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    cells = np.array([[0, 1, 2], [0, 2, 3]])
    return positions, cells


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """Small generated dataset shared by training/evaluation tests."""
    from pcsim.data import DatasetConfig, ObservationConfig, ParamRanges, build_dataset

    out = tmp_path_factory.mktemp("data") / "tiny"
    config = DatasetConfig(
        n_train=4,
        n_val=2,
        n_test=2,
        trajectories_per_task=4,
        internal_steps=24,
        output_frames=8,
        ranges=ParamRanges(length=(2.0, 0.2), mesh_h=(0.22, 0.01)),
        observation=ObservationConfig(points_per_frame=48, frame_stride=2),
    )
    build_dataset(config, out, seed=123)
    return out
