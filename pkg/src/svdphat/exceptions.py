"""
Exception hierarchy for svdphat.

Every runtime failure raised by the localization pipeline derives from
SvdPhatError and carries a machine-readable error code next to the
human-readable message.
"""


class SvdPhatError(Exception):
    """Base exception for localization errors."""

    def __init__(self, message: str, error_code: str = "SVDPHAT_ERROR") -> None:
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class GeometryError(SvdPhatError):
    """Error building array geometry or scan grids."""

    def __init__(self, message: str, error_code: str = "GEOMETRY_ERROR") -> None:
        super().__init__(message, error_code)


class SignalError(SvdPhatError):
    """Error in multichannel signal input."""

    def __init__(self, message: str, error_code: str = "SIGNAL_ERROR") -> None:
        super().__init__(message, error_code)


class DimensionMismatchError(SvdPhatError):
    """Vector or matrix shapes do not line up."""

    def __init__(self, message: str) -> None:
        super().__init__(message, "DIMENSION_MISMATCH")


class SteeringMemoryError(SvdPhatError):
    """Steering matrix would exceed the configured memory cap."""

    def __init__(self, message: str) -> None:
        super().__init__(message, "STEERING_TOO_LARGE")


class ModelBuildError(SvdPhatError):
    """Error fitting the SVD-PHAT model."""

    def __init__(self, message: str) -> None:
        super().__init__(message, "MODEL_BUILD_ERROR")


class ModelFileError(SvdPhatError):
    """Error reading or writing a model file."""

    def __init__(self, message: str, error_code: str = "MODEL_IO_ERROR") -> None:
        super().__init__(message, error_code)


class NnIndexError(SvdPhatError):
    """Error building the nearest-neighbor index."""

    def __init__(self, message: str, error_code: str = "NN_INDEX_ERROR") -> None:
        super().__init__(message, error_code)


class AudioFormatError(SvdPhatError):
    """WAV input does not match the array configuration."""

    def __init__(self, message: str, error_code: str = "AUDIO_FORMAT_ERROR") -> None:
        super().__init__(message, error_code)


class EvaluationError(SvdPhatError):
    """Error computing evaluation metrics."""

    def __init__(self, message: str, error_code: str = "EVALUATION_ERROR") -> None:
        super().__init__(message, error_code)
