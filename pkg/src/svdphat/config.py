"""
Configuration management for svdphat.

Handles environment variables and runtime defaults for model fitting,
simulation and benchmarking, with sensible defaults and clear validation.
"""

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal, Optional, Tuple

from .validation import MAX_GRID_LEVEL

LogLevel = Literal["quiet", "info", "debug"]


def shipped_config_dir() -> Path:
    """Directory holding the array configs shipped with the package."""
    return Path(str(resources.files("svdphat") / "arrays"))


@dataclass
class Config:
    """Runtime configuration for svdphat."""

    # Geometry settings
    config_dir: Optional[Path] = None
    grid_level: int = 4

    # Model settings
    delta: float = 1e-5
    leaf_size: int = 16
    max_steering_mb: int = 1024
    store_steering: bool = True

    # Simulation and benchmark settings
    threads: int = 1
    scenes: int = 50
    signal_seconds: float = 0.5
    snr_range_db: Tuple[float, float] = (0.0, 30.0)

    # Output settings
    log_level: LogLevel = "info"

    @classmethod
    def from_env(cls) -> "Config":
        """Create configuration from environment variables."""
        config = cls()

        # Geometry configuration
        config_dir_env = os.getenv("SVDPHAT_CONFIG_DIR")
        if config_dir_env:
            config.config_dir = Path(config_dir_env).expanduser()
        config.grid_level = int(
            os.getenv("SVDPHAT_GRID_LEVEL", str(config.grid_level))
        )

        # Model configuration
        config.delta = float(os.getenv("SVDPHAT_DELTA", str(config.delta)))
        config.leaf_size = int(os.getenv("SVDPHAT_LEAF_SIZE", str(config.leaf_size)))
        config.max_steering_mb = int(
            os.getenv("SVDPHAT_MAX_STEERING_MB", str(config.max_steering_mb))
        )
        config.store_steering = _parse_bool(
            os.getenv("SVDPHAT_STORE_STEERING", "true")
        )

        # Simulation and benchmark configuration
        config.threads = int(os.getenv("SVDPHAT_THREADS", str(config.threads)))
        config.scenes = int(os.getenv("SVDPHAT_SCENES", str(config.scenes)))
        config.signal_seconds = float(
            os.getenv("SVDPHAT_SIGNAL_SECONDS", str(config.signal_seconds))
        )

        snr_env = os.getenv("SVDPHAT_SNR_RANGE_DB")
        if snr_env:
            try:
                low, high = map(float, snr_env.split(":"))
                config.snr_range_db = (low, high)
            except ValueError:
                raise ValueError(
                    f"Invalid SVDPHAT_SNR_RANGE_DB: {snr_env}. Use format: '0:30'"
                )

        log_level_env = os.getenv("SVDPHAT_LOG_LEVEL")
        if log_level_env:
            if log_level_env.lower() in ("quiet", "info", "debug"):
                config.log_level = log_level_env.lower()  # type: ignore
            else:
                raise ValueError(
                    f"Invalid SVDPHAT_LOG_LEVEL: {log_level_env}. "
                    "Must be one of: quiet, info, debug"
                )

        # Validate configuration
        config._validate()

        return config

    def _validate(self) -> None:
        """Validate configuration values."""
        if self.grid_level < 0:
            raise ValueError("grid_level cannot be negative")
        if self.grid_level > MAX_GRID_LEVEL:
            raise ValueError(f"grid_level cannot exceed {MAX_GRID_LEVEL}")

        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in the open interval (0, 1)")

        if self.leaf_size < 1:
            raise ValueError("leaf_size must be at least 1")

        if self.max_steering_mb < 1:
            raise ValueError("max_steering_mb must be at least 1")

        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.threads > 64:
            raise ValueError("threads cannot exceed 64")

        if self.scenes < 1:
            raise ValueError("scenes must be at least 1")

        if self.signal_seconds <= 0:
            raise ValueError("signal_seconds must be positive")

        low, high = self.snr_range_db
        if low > high:
            raise ValueError("snr_range_db lower bound cannot exceed upper bound")

        if self.config_dir is not None and not self.config_dir.is_dir():
            raise ValueError(f"config_dir does not exist: {self.config_dir}")

    @property
    def array_dir(self) -> Path:
        """Directory searched for geometry labels."""
        return self.config_dir if self.config_dir is not None else shipped_config_dir()

    @property
    def max_steering_bytes(self) -> int:
        return self.max_steering_mb * 1024 * 1024

    def __str__(self) -> str:
        """String representation for logging."""
        return (
            f"Config("
            f"arrays={self.array_dir}, "
            f"grid_level={self.grid_level}, "
            f"delta={self.delta:g}, "
            f"leaf_size={self.leaf_size}, "
            f"threads={self.threads}, "
            f"scenes={self.scenes}"
            f")"
        )


def _parse_bool(value: str) -> bool:
    """Parse a string as a boolean value."""
    return value.lower() in ("true", "1", "yes", "on")
