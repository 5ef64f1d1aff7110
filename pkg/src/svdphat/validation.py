"""
Validation utilities for svdphat.

Provides input validation for numeric parameters, directions, paths and the
list-valued options accepted by the command line.
"""

import math
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

UNIT_TOLERANCE = 1e-9
MAX_GRID_LEVEL = 8


class ValidationError(Exception):
    """Custom exception for validation errors with error codes."""

    def __init__(self, message: str, error_code: str = "VALIDATION_ERROR"):
        self.message = message
        self.error_code = error_code
        super().__init__(message)


def validate_delta(delta: float) -> float:
    """
    Validate the reconstruction tolerance.

    Args:
        delta: Tolerable fraction of lost singular energy

    Returns:
        The validated delta

    Raises:
        ValidationError: If delta is not in the open interval (0, 1)
    """
    if not isinstance(delta, (int, float)) or not math.isfinite(delta):
        raise ValidationError(
            f"delta must be a finite number, got {delta!r}", "INVALID_DELTA"
        )

    if not 0.0 < delta < 1.0:
        raise ValidationError(
            f"delta must be in the open interval (0, 1), got {delta}", "INVALID_DELTA"
        )

    return float(delta)


def validate_unit_vector(
    vector: Sequence[float], name: str = "direction"
) -> np.ndarray:
    """
    Validate that a 3-vector has unit Euclidean norm.

    Args:
        vector: Candidate direction
        name: Name used in error messages

    Returns:
        The vector as a float64 array

    Raises:
        ValidationError: If the shape is wrong or the norm differs from 1
    """
    array = np.asarray(vector, dtype=np.float64)

    if array.shape != (3,):
        raise ValidationError(
            f"{name} must be a 3-vector, got shape {array.shape}", "INVALID_VECTOR"
        )

    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} must be finite", "INVALID_VECTOR")

    norm = float(np.linalg.norm(array))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise ValidationError(
            f"{name} must have unit norm, got norm {norm:.12g}", "NON_UNIT_DIRECTION"
        )

    return array


def validate_grid_level(level: int) -> int:
    """
    Validate the icosphere subdivision level.

    Raises:
        ValidationError: If the level is negative or not an integer
    """
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise ValidationError(
            f"grid level must be an integer, got {level!r}", "INVALID_GRID_LEVEL"
        )

    if level < 0:
        raise ValidationError(
            f"grid level must be non-negative, got {level}", "INVALID_GRID_LEVEL"
        )

    return int(level)


def validate_file_path(path: Union[str, Path], what: str = "File") -> Path:
    """
    Validate that a path points to an existing file.

    Args:
        path: Path to check
        what: Description used in error messages

    Returns:
        Expanded path

    Raises:
        ValidationError: If the path is empty or the file does not exist
    """
    if not str(path).strip():
        raise ValidationError(f"{what} path cannot be empty", "EMPTY_PATH")

    resolved = Path(path).expanduser()
    if not resolved.is_file():
        raise ValidationError(f"{what} not found: {resolved}", "FILE_NOT_FOUND")

    return resolved


def validate_output_path(path: Union[str, Path]) -> Path:
    """
    Validate that an output file can be created.

    Raises:
        ValidationError: If the parent directory does not exist
    """
    if not str(path).strip():
        raise ValidationError("Output path cannot be empty", "EMPTY_PATH")

    resolved = Path(path).expanduser()
    if not resolved.parent.exists():
        raise ValidationError(
            f"Output directory does not exist: {resolved.parent}", "INVALID_PATH"
        )

    return resolved


def parse_deltas(text: str) -> List[float]:
    """
    Parse a delta list option.

    Accepts a comma separated list (``1e-1,1e-3``) or a decade range
    (``1e-1..1e-6``), which expands to every power of ten between the two
    bounds, inclusive, in the order written.

    Raises:
        ValidationError: If the option cannot be parsed or a value is out of range
    """
    text = text.strip()
    if not text:
        raise ValidationError("deltas cannot be empty", "EMPTY_DELTAS")

    try:
        if ".." in text:
            start_text, stop_text = text.split("..", 1)
            start_exp = math.log10(float(start_text))
            stop_exp = math.log10(float(stop_text))
            if not (start_exp.is_integer() and stop_exp.is_integer()):
                raise ValidationError(
                    f"delta range bounds must be powers of ten: {text}",
                    "INVALID_DELTAS",
                )
            step = 1 if stop_exp >= start_exp else -1
            exponents = range(int(start_exp), int(stop_exp) + step, step)
            deltas = [float(f"1e{e}") for e in exponents]
        else:
            deltas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ValidationError(f"Invalid deltas '{text}': {e}", "INVALID_DELTAS")

    if not deltas:
        raise ValidationError("deltas cannot be empty", "EMPTY_DELTAS")

    return [validate_delta(d) for d in deltas]


def validate_geometry_label(label: str, available: Iterable[str]) -> str:
    """
    Validate a shipped geometry label.

    Raises:
        ValidationError: If the label is unknown; the message lists the choices
    """
    choices = sorted(available)
    normalized = label.strip().lower()

    if normalized not in choices:
        raise ValidationError(
            f"Unknown geometry '{label}'. Shipped configs: {', '.join(choices)}",
            "UNKNOWN_GEOMETRY",
        )

    return normalized


def validate_positive_int(value: int, name: str) -> int:
    """
    Validate a strictly positive integer option.

    Raises:
        ValidationError: If the value is below 1
    """
    if value < 1:
        raise ValidationError(
            f"{name} must be at least 1, got {value}", "INVALID_VALUE"
        )
    return value
