"""
Tests for model persistence.
"""

import struct
from pathlib import Path

import numpy as np
import pytest

from svdphat.exceptions import ModelFileError
from svdphat.model_io import (
    FORMAT_VERSION,
    MAGIC,
    geometry_digest,
    inspect_model,
    load_model,
    save_model,
)
from svdphat.srp import SteeringMatrix, self_match_inputs
from svdphat.svd_model import SvdPhatModel


@pytest.fixture
def model(tetra_steering: SteeringMatrix) -> SvdPhatModel:
    """Fitted model over the tetra array."""
    return SvdPhatModel.fit(tetra_steering, 1e-3, leaf_size=8)


@pytest.fixture
def model_file(model: SvdPhatModel, tmp_path: Path) -> Path:
    """Saved model file."""
    return save_model(model, tmp_path / "tetra.svdphat")


class TestRoundTrip:
    """Test save and load."""

    def test_arrays_bit_exact(self, model: SvdPhatModel, model_file: Path):
        """Test every stored array survives unchanged."""
        loaded = load_model(model_file)

        assert loaded.rank == model.rank
        assert loaded.delta == model.delta
        assert loaded.total_energy == model.total_energy
        np.testing.assert_array_equal(loaded.projection, model.projection)
        np.testing.assert_array_equal(loaded.dictionary, model.dictionary)
        np.testing.assert_array_equal(loaded.row_norms, model.row_norms)
        np.testing.assert_array_equal(loaded.singular_values, model.singular_values)
        np.testing.assert_array_equal(loaded.grid.points, model.grid.points)
        assert loaded.steering is not None and model.steering is not None
        np.testing.assert_array_equal(
            loaded.steering.coefficients, model.steering.coefficients
        )

    def test_config_preserved(self, model: SvdPhatModel, model_file: Path):
        """Test the array configuration and grid level are restored."""
        loaded = load_model(model_file)
        assert loaded.config == model.config
        assert loaded.grid.level == 2

    def test_same_estimates(self, model: SvdPhatModel, model_file: Path, rng):
        """Test the loaded model localizes identically."""
        loaded = load_model(model_file)
        assert model.steering is not None
        x = self_match_inputs(model.steering, [12, 99])
        noisy = x + 0.3 * rng.standard_normal(x.shape)
        for a, b in zip(model.localize_frames(noisy), loaded.localize_frames(noisy)):
            assert a.index == b.index
            assert a.energy == b.energy

    def test_tree_preserved(self, model: SvdPhatModel, model_file: Path):
        """Test the k-d tree is restored node for node."""
        loaded = load_model(model_file)
        for key, value in model.nn_index.to_arrays().items():
            np.testing.assert_array_equal(loaded.nn_index.to_arrays()[key], value)
        assert loaded.nn_index.leaf_size == 8

    def test_without_steering(self, tetra_steering: SteeringMatrix, tmp_path: Path):
        """Test models saved without W are smaller and still localize."""
        full = save_model(SvdPhatModel.fit(tetra_steering, 1e-3), tmp_path / "a")
        lean_model = SvdPhatModel.fit(tetra_steering, 1e-3, store_steering=False)
        lean = save_model(lean_model, tmp_path / "b")

        assert lean.stat().st_size < full.stat().st_size
        loaded = load_model(lean)
        assert loaded.steering is None
        x = self_match_inputs(tetra_steering, [40])[0]
        assert loaded.localize(x).index == 40

    def test_string_paths(self, model: SvdPhatModel, tmp_path: Path):
        """Test save, load and inspect accept plain strings."""
        path = save_model(model, str(tmp_path / "text.svdphat"))
        assert isinstance(path, Path)
        assert load_model(str(path)).rank == model.rank
        assert inspect_model(str(path))["rank"] == model.rank

    def test_header_fields(self, model_file: Path):
        """Test magic and version at the start of the file."""
        data = model_file.read_bytes()
        assert data.startswith(MAGIC)
        assert struct.unpack_from("<I", data, len(MAGIC))[0] == FORMAT_VERSION
        assert data[-36:-32] == b"END!"


class TestCorruption:
    """Test rejected files."""

    def test_flipped_byte(self, model_file: Path):
        """Test a flipped payload byte is detected."""
        data = bytearray(model_file.read_bytes())
        data[len(data) // 2] ^= 0xFF
        model_file.write_bytes(bytes(data))
        with pytest.raises(ModelFileError) as exc_info:
            load_model(model_file)
        assert exc_info.value.error_code == "MODEL_CHECKSUM_MISMATCH"

    def test_truncated(self, model_file: Path):
        """Test a truncated file is detected."""
        data = model_file.read_bytes()
        model_file.write_bytes(data[: len(data) - 100])
        with pytest.raises(ModelFileError) as exc_info:
            load_model(model_file)
        assert exc_info.value.error_code == "MODEL_CHECKSUM_MISMATCH"

    def test_not_a_model(self, tmp_path: Path):
        """Test a file with the wrong magic."""
        path = tmp_path / "other.bin"
        path.write_bytes(b"RIFF" + bytes(200))
        with pytest.raises(ModelFileError, match="Not an svdphat model") as exc_info:
            load_model(path)
        assert exc_info.value.error_code == "MODEL_FORMAT_ERROR"

    def test_version_mismatch(self, model_file: Path):
        """Test an unknown format version."""
        data = bytearray(model_file.read_bytes())
        struct.pack_into("<I", data, len(MAGIC), FORMAT_VERSION + 1)
        model_file.write_bytes(bytes(data))
        with pytest.raises(ModelFileError, match="version") as exc_info:
            load_model(model_file)
        assert exc_info.value.error_code == "MODEL_VERSION_MISMATCH"

    def test_missing_file(self, tmp_path: Path):
        """Test reading a file that does not exist."""
        with pytest.raises(ModelFileError, match="Could not read") as exc_info:
            load_model(tmp_path / "missing.svdphat")
        assert exc_info.value.error_code == "MODEL_IO_ERROR"

    def test_unwritable_target(self, model: SvdPhatModel, tmp_path: Path):
        """Test writing into a missing directory."""
        with pytest.raises(ModelFileError, match="Could not write"):
            save_model(model, tmp_path / "missing" / "model.svdphat")


class TestGeometryDigest:
    """Test the geometry hash."""

    def test_depends_on_geometry(self, model: SvdPhatModel):
        """Test the digest changes with the array."""
        assert model.config is not None
        other = model.config.model_copy(update={"speed_of_sound": 340.0})
        assert geometry_digest(model.config, model.grid) != geometry_digest(
            other, model.grid
        )
        assert len(geometry_digest(model.config, model.grid)) == 32


class TestInspectModel:
    """Test the model summary."""

    def test_summary_fields(self, model: SvdPhatModel, model_file: Path):
        """Test header values and diagnostics."""
        summary = inspect_model(model_file)
        assert summary["label"] == "tetra"
        assert summary["n_mics"] == 4
        assert summary["n_points"] == 162
        assert summary["rank"] == model.rank
        assert summary["stores_steering"] is True
        assert summary["leaf_size"] == 8
        assert summary["file_bytes"] == model_file.stat().st_size
        assert summary["reconstruction_error"] <= 1e-3 + 1e-12
        assert summary["tree_depth"] >= 1
