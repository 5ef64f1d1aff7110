"""
Data models for svdphat.

Defines Pydantic models for array configurations, localization results,
benchmark rows and the plumbing records exchanged with files and the CLI.
"""

import math
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Vector3 = Tuple[float, float, float]


class Method(str, Enum):
    """Localization method."""

    SVD = "svd"
    SRP = "srp"


class SignalKind(str, Enum):
    """Synthetic source signal family."""

    NOISE = "noise"
    SWEEP = "sweep"


class ArrayConfig(BaseModel):
    """Microphone array geometry and STFT parameters."""

    model_config = ConfigDict(frozen=True)

    label: Optional[str] = Field(None, description="Short geometry label (1d, 2d, 3d)")

    mics: Tuple[Vector3, ...] = Field(
        ..., description="Microphone xyz positions in meters", min_length=2
    )

    sample_rate: float = Field(..., description="Sample rate f_S in Hz", gt=0)

    speed_of_sound: float = Field(
        343.0, description="Speed of sound c in m/s", gt=0
    )

    frame_size: int = Field(..., description="STFT frame size N in samples", gt=0)

    hop_size: int = Field(..., description="STFT hop size in samples", gt=0)

    @field_validator("mics")
    @classmethod
    def validate_mics(cls, v: Tuple[Vector3, ...]) -> Tuple[Vector3, ...]:
        """Reject non-finite microphone coordinates."""
        for m, position in enumerate(v):
            if not all(math.isfinite(c) for c in position):
                raise ValueError(f"Microphone {m} has a non-finite position")
        return v

    @field_validator("frame_size")
    @classmethod
    def validate_frame_size(cls, v: int) -> int:
        """Frame size must be even so that bin N/2 exists."""
        if v % 2:
            raise ValueError(f"frame_size must be even, got {v}")
        return v

    @model_validator(mode="after")
    def validate_hop_size(self) -> "ArrayConfig":
        """Hop size cannot exceed the frame size."""
        if self.hop_size > self.frame_size:
            raise ValueError(
                f"hop_size ({self.hop_size}) cannot exceed frame_size "
                f"({self.frame_size})"
            )
        return self

    @property
    def n_mics(self) -> int:
        return len(self.mics)

    @property
    def n_pairs(self) -> int:
        return self.n_mics * (self.n_mics - 1) // 2

    @property
    def n_bins(self) -> int:
        return self.frame_size // 2 + 1

    @property
    def n_columns(self) -> int:
        """Length of the concatenated cross-spectrum vector, P(N/2+1)."""
        return self.n_pairs * self.n_bins

    @property
    def positions(self) -> np.ndarray:
        """Microphone positions as an (M, 3) array."""
        return np.asarray(self.mics, dtype=np.float64)

    @property
    def samples_per_meter(self) -> float:
        """Conversion factor f_S / c."""
        return self.sample_rate / self.speed_of_sound

    @property
    def aperture(self) -> float:
        """Largest distance between two microphones, in meters."""
        positions = self.positions
        diffs = positions[:, None, :] - positions[None, :, :]
        return float(np.max(np.linalg.norm(diffs, axis=-1)))


class DoaEstimate(BaseModel):
    """Direction of arrival estimate for one frame."""

    frame: int = Field(0, description="Frame index l", ge=0)

    index: int = Field(
        ..., description="Grid index of the estimate (-1 when invalid)", ge=-1
    )

    direction: Vector3 = Field(..., description="Unit direction of grid point")

    energy: float = Field(..., description="SRP-PHAT energy Y at the estimate")

    valid: bool = Field(True, description="False for degenerate (silent) frames")

    method: Method = Field(Method.SVD, description="Method that produced it")

    @model_validator(mode="after")
    def validate_flag(self) -> "DoaEstimate":
        """Valid estimates point at a grid index."""
        if self.valid and self.index < 0:
            raise ValueError("A valid estimate needs a non-negative grid index")
        return self

    @classmethod
    def invalid(cls, frame: int, method: Method) -> "DoaEstimate":
        """Create the flagged estimate returned for degenerate frames."""
        return cls(
            frame=frame,
            index=-1,
            direction=(0.0, 0.0, 0.0),
            energy=0.0,
            valid=False,
            method=method,
        )


class BenchmarkRow(BaseModel):
    """One (geometry, delta) point of the delta sweep."""

    geometry: str = Field(..., description="Geometry label")

    delta: float = Field(..., description="Reconstruction tolerance", gt=0, lt=1)

    K: int = Field(..., description="Retained rank", ge=1)

    gain: float = Field(..., description="Row reduction Q/K", gt=0)

    rmse_svd: float = Field(..., description="Mean RMSE of SVD-PHAT", ge=0)

    rmse_srp: float = Field(..., description="Mean RMSE of SRP-PHAT", ge=0)

    delta_rmse: float = Field(..., description="rmse_svd - rmse_srp")

    fps_svd: float = Field(..., description="SVD-PHAT frames per second", ge=0)

    fps_srp: float = Field(..., description="SRP-PHAT frames per second", ge=0)

    n_points: int = Field(..., description="Grid size Q", ge=1, exclude=True)

    @model_validator(mode="after")
    def validate_derived(self) -> "BenchmarkRow":
        """Derived columns must agree with their inputs."""
        if self.gain != self.n_points / self.K:
            raise ValueError("gain must equal Q/K")
        if self.delta_rmse != self.rmse_svd - self.rmse_srp:
            raise ValueError("delta_rmse must equal rmse_svd - rmse_srp")
        return self

    @classmethod
    def build(
        cls,
        geometry: str,
        delta: float,
        rank: int,
        n_points: int,
        rmse_svd: float,
        rmse_srp: float,
        fps_svd: float,
        fps_srp: float,
    ) -> "BenchmarkRow":
        """Create a row, deriving gain and delta_rmse."""
        return cls(
            geometry=geometry,
            delta=delta,
            K=rank,
            gain=n_points / rank,
            rmse_svd=rmse_svd,
            rmse_srp=rmse_srp,
            delta_rmse=rmse_svd - rmse_srp,
            fps_svd=fps_svd,
            fps_srp=fps_srp,
            n_points=n_points,
        )


class SceneTruth(BaseModel):
    """Ground truth written next to a simulated recording."""

    direction: Vector3 = Field(..., description="True source direction s0")

    snr_db: float = Field(..., description="Per-channel SNR in dB")

    seed: int = Field(..., description="Random seed of the scene")

    signal_kind: SignalKind = Field(..., description="Source signal family")

    sample_rate: float = Field(..., description="Sample rate in Hz", gt=0)

    n_samples: int = Field(..., description="Samples per channel", ge=1)

    array_label: Optional[str] = Field(None, description="Array geometry label")

    reference_mic: int = Field(0, description="Delay reference microphone", ge=0)

    grid_index: Optional[int] = Field(
        None, description="Grid point the source was snapped to, if any"
    )


class BenchmarkMetadata(BaseModel):
    """Settings recorded next to the benchmark CSV."""

    aggregation: str = Field(
        "mean", description="How per-scene RMSE values are combined"
    )

    scenes: int = Field(..., description="Scenes per geometry", ge=1)

    seed: int = Field(..., description="Base random seed")

    grid_level: int = Field(..., description="Scan grid subdivision level", ge=0)

    n_points: int = Field(..., description="Grid size Q", ge=1)

    signal_seconds: float = Field(..., description="Scene duration", gt=0)

    snr_range_db: Tuple[float, float] = Field(..., description="SNR draw range")

    timing: bool = Field(True, description="Whether fps columns were measured")

    geometries: List[str] = Field(..., description="Geometry labels in order")

    deltas: List[float] = Field(..., description="Delta values in order")


class RunConfig(BaseModel):
    """Validated settings of one CLI invocation."""

    array_path: Optional[Path] = Field(None, description="Array config file")

    grid_level: int = Field(4, description="Scan grid subdivision level", ge=0)

    delta: float = Field(1e-5, description="Reconstruction tolerance")

    model_path: Optional[Path] = Field(None, description="Model file")

    input_path: Optional[Path] = Field(None, description="Input WAV file")

    output_path: Optional[Path] = Field(None, description="Output file")

    json_output: bool = Field(False, description="Emit JSON lines instead of CSV")

    seed: int = Field(0, description="Random seed")

    threads: int = Field(1, description="Worker thread cap", ge=1)

    @field_validator("delta")
    @classmethod
    def validate_delta(cls, v: float) -> float:
        """Delta must lie in the open interval (0, 1)."""
        if not 0.0 < v < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {v}")
        return v

    @field_validator("array_path", "input_path")
    @classmethod
    def validate_existing(cls, v: Optional[Path]) -> Optional[Path]:
        """Input files must exist before work begins."""
        if v is not None and not v.expanduser().is_file():
            raise ValueError(f"File not found: {v}")
        return v.expanduser() if v is not None else None

    @field_validator("output_path")
    @classmethod
    def validate_output(cls, v: Optional[Path]) -> Optional[Path]:
        """Output directory must exist."""
        if v is None:
            return v
        v = v.expanduser()
        if not v.parent.exists():
            raise ValueError(f"Output directory does not exist: {v.parent}")
        return v
