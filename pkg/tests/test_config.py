"""
Tests for configuration management.
"""

import os
from pathlib import Path

import pytest

from svdphat.config import Config, shipped_config_dir
from svdphat.validation import MAX_GRID_LEVEL


@pytest.fixture(autouse=True)
def clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Remove SVDPHAT_* variables inherited from the shell."""
    for key in list(os.environ):
        if key.startswith("SVDPHAT_"):
            monkeypatch.delenv(key, raising=False)


class TestConfig:
    """Test configuration management."""

    def test_default_config(self) -> None:
        """Test default configuration values."""
        config = Config()

        assert config.config_dir is None
        assert config.grid_level == 4
        assert config.delta == 1e-5
        assert config.leaf_size == 16
        assert config.threads == 1
        assert config.scenes == 50
        assert config.snr_range_db == (0.0, 30.0)
        assert config.log_level == "info"

    def test_from_env_with_defaults(self) -> None:
        """Test configuration from environment with defaults."""
        config = Config.from_env()

        assert config.grid_level == 4
        assert config.array_dir == shipped_config_dir()
        assert config.store_steering is True

    def test_from_env_with_custom_values(
        self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path
    ) -> None:
        """Test configuration from environment with custom values."""
        monkeypatch.setenv("SVDPHAT_CONFIG_DIR", str(tmp_path))
        monkeypatch.setenv("SVDPHAT_GRID_LEVEL", "3")
        monkeypatch.setenv("SVDPHAT_DELTA", "1e-3")
        monkeypatch.setenv("SVDPHAT_LEAF_SIZE", "8")
        monkeypatch.setenv("SVDPHAT_MAX_STEERING_MB", "64")
        monkeypatch.setenv("SVDPHAT_STORE_STEERING", "no")
        monkeypatch.setenv("SVDPHAT_THREADS", "4")
        monkeypatch.setenv("SVDPHAT_SCENES", "10")
        monkeypatch.setenv("SVDPHAT_SIGNAL_SECONDS", "0.25")
        monkeypatch.setenv("SVDPHAT_SNR_RANGE_DB", "5:20")
        monkeypatch.setenv("SVDPHAT_LOG_LEVEL", "DEBUG")

        config = Config.from_env()

        assert config.array_dir == tmp_path
        assert config.grid_level == 3
        assert config.delta == 1e-3
        assert config.leaf_size == 8
        assert config.max_steering_bytes == 64 * 1024 * 1024
        assert config.store_steering is False
        assert config.threads == 4
        assert config.scenes == 10
        assert config.signal_seconds == 0.25
        assert config.snr_range_db == (5.0, 20.0)
        assert config.log_level == "debug"

    def test_invalid_snr_range(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test invalid SNR range format."""
        monkeypatch.setenv("SVDPHAT_SNR_RANGE_DB", "0-30")

        with pytest.raises(ValueError, match="Invalid SVDPHAT_SNR_RANGE_DB"):
            Config.from_env()

    def test_invalid_log_level(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test invalid log level."""
        monkeypatch.setenv("SVDPHAT_LOG_LEVEL", "verbose")

        with pytest.raises(ValueError, match="Invalid SVDPHAT_LOG_LEVEL"):
            Config.from_env()

    def test_missing_config_dir(
        self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path
    ) -> None:
        """Test config directory that does not exist."""
        monkeypatch.setenv("SVDPHAT_CONFIG_DIR", str(tmp_path / "missing"))

        with pytest.raises(ValueError, match="config_dir does not exist"):
            Config.from_env()

    def test_validation_errors(self) -> None:
        """Test configuration validation errors."""
        config = Config()

        config.grid_level = -1
        with pytest.raises(ValueError, match="grid_level cannot be negative"):
            config._validate()

        config.grid_level = 9
        with pytest.raises(ValueError, match="grid_level cannot exceed 8"):
            config._validate()

        config.grid_level = MAX_GRID_LEVEL
        config._validate()

        config.grid_level = MAX_GRID_LEVEL + 1
        with pytest.raises(ValueError, match=f"cannot exceed {MAX_GRID_LEVEL}"):
            config._validate()

        config.grid_level = 4
        config.delta = 1.0
        with pytest.raises(ValueError, match="delta must be in the open interval"):
            config._validate()

        config.delta = 1e-5
        config.threads = 0
        with pytest.raises(ValueError, match="threads must be at least 1"):
            config._validate()

        config.threads = 65
        with pytest.raises(ValueError, match="threads cannot exceed 64"):
            config._validate()

        config.threads = 1
        config.snr_range_db = (30.0, 0.0)
        with pytest.raises(ValueError, match="lower bound cannot exceed"):
            config._validate()

    @pytest.mark.parametrize(
        "value,expected",
        [("true", True), ("1", True), ("YES", True), ("on", True), ("0", False)],
    )
    def test_parse_bool(
        self, monkeypatch: pytest.MonkeyPatch, value: str, expected: bool
    ) -> None:
        """Test boolean environment parsing."""
        monkeypatch.setenv("SVDPHAT_STORE_STEERING", value)
        assert Config.from_env().store_steering is expected

    def test_str_representation(self) -> None:
        """Test string representation for logging."""
        text = str(Config())

        assert text.startswith("Config(")
        assert "grid_level=4" in text
        assert "delta=1e-05" in text

    def test_shipped_configs_present(self) -> None:
        """Test that the shipped geometry files are installed."""
        names = sorted(p.name for p in shipped_config_dir().glob("*.yaml"))
        assert names == ["linear_1d.yaml", "planar_2d.yaml", "spatial_3d.yaml"]
