"""
svdphat.

Sound source localization with microphone arrays: exhaustive SRP-PHAT over a
spherical grid, and SVD-PHAT, which factorizes the steering matrix offline so
that each frame is localized by a low-dimensional projection and an exact
k-d tree search. Includes a free-field simulator and a delta-sweep benchmark.
"""

__version__ = "1.0.0"
__author__ = "svdphat Contributors"
__description__ = "SRP-PHAT and SVD-PHAT sound source localization"

from .config import Config
from .exceptions import (
    AudioFormatError,
    DimensionMismatchError,
    EvaluationError,
    GeometryError,
    ModelBuildError,
    ModelFileError,
    NnIndexError,
    SignalError,
    SteeringMemoryError,
    SvdPhatError,
)
from .geometry import (
    ScanGrid,
    build_grid,
    load_array_config,
    mic_pairs,
    resolve_array_config,
    tdoa_exact,
    tdoa_farfield,
)
from .model_io import load_model, save_model
from .models import (
    ArrayConfig,
    BenchmarkMetadata,
    BenchmarkRow,
    DoaEstimate,
    Method,
    SceneTruth,
    SignalKind,
)
from .nn_index import NnIndex
from .spectral import (
    CrossSpectrumVector,
    SpectrumFrame,
    cross_spectrum,
    stft_frames,
)
from .srp import SteeringMatrix, build_steering_matrix, srp_localize
from .svd_model import Projection, SvdPhatModel, decompose
from .validation import ValidationError

__all__ = [
    # Configuration and errors
    "Config",
    "SvdPhatError",
    "GeometryError",
    "SignalError",
    "DimensionMismatchError",
    "SteeringMemoryError",
    "ModelBuildError",
    "ModelFileError",
    "NnIndexError",
    "AudioFormatError",
    "EvaluationError",
    "ValidationError",
    # Geometry
    "ArrayConfig",
    "ScanGrid",
    "build_grid",
    "load_array_config",
    "resolve_array_config",
    "mic_pairs",
    "tdoa_exact",
    "tdoa_farfield",
    # Spectral front-end
    "SpectrumFrame",
    "CrossSpectrumVector",
    "stft_frames",
    "cross_spectrum",
    # Localization
    "SteeringMatrix",
    "build_steering_matrix",
    "srp_localize",
    "SvdPhatModel",
    "Projection",
    "decompose",
    "NnIndex",
    "save_model",
    "load_model",
    # Records
    "DoaEstimate",
    "Method",
    "BenchmarkRow",
    "BenchmarkMetadata",
    "SceneTruth",
    "SignalKind",
]
