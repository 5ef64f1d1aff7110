"""
Shared fixtures for svdphat tests.
"""

from pathlib import Path

import numpy as np
import pytest
import yaml

from svdphat.geometry import ScanGrid, build_grid
from svdphat.models import ArrayConfig
from svdphat.srp import SteeringMatrix, build_steering_matrix

TETRA_MICS = (
    (0.0, 0.0, 0.0),
    (0.2, 0.0, 0.0),
    (0.0, 0.2, 0.0),
    (0.0, 0.0, 0.2),
)


@pytest.fixture
def tetra_config() -> ArrayConfig:
    """Small non-coplanar array with short frames."""
    return ArrayConfig(
        label="tetra",
        mics=TETRA_MICS,
        sample_rate=16000,
        speed_of_sound=343.0,
        frame_size=64,
        hop_size=32,
    )


@pytest.fixture
def pair_config() -> ArrayConfig:
    """Two microphones 0.343 m apart on the x axis (16 samples at 16 kHz)."""
    return ArrayConfig(
        label="pair",
        mics=((0.0, 0.0, 0.0), (0.343, 0.0, 0.0)),
        sample_rate=16000,
        speed_of_sound=343.0,
        frame_size=256,
        hop_size=128,
    )


@pytest.fixture
def small_grid() -> ScanGrid:
    """Level 2 icosphere (162 points)."""
    return build_grid(2)


@pytest.fixture
def tetra_steering(tetra_config: ArrayConfig, small_grid: ScanGrid) -> SteeringMatrix:
    """Steering matrix of the tetra array over the level 2 grid."""
    return build_steering_matrix(tetra_config, small_grid)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def tetra_yaml(tmp_path: Path) -> Path:
    """Array config file for CLI tests."""
    path = tmp_path / "tetra.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "label": "tetra",
                "sample_rate": 16000,
                "speed_of_sound": 343.0,
                "frame_size": 128,
                "hop_size": 64,
                "mics": [list(m) for m in TETRA_MICS],
            }
        )
    )
    return path


@pytest.fixture
def pair_yaml(tmp_path: Path) -> Path:
    """Two microphones 0.343 m apart on the z axis, as a config file."""
    path = tmp_path / "pair.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "label": "pair",
                "sample_rate": 16000,
                "speed_of_sound": 343.0,
                "frame_size": 256,
                "hop_size": 128,
                "mics": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.343]],
            }
        )
    )
    return path
