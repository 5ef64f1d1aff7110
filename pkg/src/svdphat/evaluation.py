"""
Evaluation metrics for DOA estimates.

Linear arrays cannot tell directions on a cone apart and planar arrays cannot
tell the two half-spaces apart, so estimates and ground truth are first
mapped by the array dimensionality before the error is measured.
"""

from typing import Sequence

import numpy as np

from .exceptions import EvaluationError
from .models import ArrayConfig, DoaEstimate
from .validation import ValidationError, validate_unit_vector

RANK_TOLERANCE = 1e-9


def array_dimensionality(config: ArrayConfig) -> int:
    """1 for linear, 2 for planar and 3 for volumetric arrays."""
    positions = config.positions
    centered = positions - positions.mean(axis=0)
    rank = int(np.linalg.matrix_rank(centered, tol=RANK_TOLERANCE * config.aperture))
    return min(max(rank, 1), 3)


def _map_rows(directions: np.ndarray, alpha: int) -> np.ndarray:
    if alpha == 1:
        g = np.arctan2(directions[:, 2], np.hypot(directions[:, 0], directions[:, 1]))
        return np.stack([np.cos(g), np.zeros_like(g), np.sin(g)], axis=1)
    if alpha == 2:
        mapped = directions.copy()
        mapped[:, 2] = np.abs(mapped[:, 2])
        return mapped
    return directions


def _check_alpha(alpha: int) -> int:
    if alpha not in (1, 2, 3):
        raise ValidationError(
            f"Array dimensionality must be 1, 2 or 3, got {alpha}", "INVALID_ALPHA"
        )
    return alpha


def map_direction(s: Sequence[float], alpha: int) -> np.ndarray:
    """
    Map a unit direction to the part of it the array can resolve.

    alpha=1 folds s onto the arc [cos g, 0, sin g] with
    g = atan2(s_z, sqrt(s_x^2 + s_y^2)); alpha=2 folds it onto the upper
    hemisphere; alpha=3 returns it unchanged.

    Raises:
        ValidationError: If s is not a unit 3-vector or alpha is invalid
    """
    u = validate_unit_vector(s)
    return _map_rows(u[None, :], _check_alpha(alpha))[0]


def angular_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Angle in radians between two directions."""
    u = np.asarray(a, dtype=np.float64)
    v = np.asarray(b, dtype=np.float64)
    cosine = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def rmse(estimates: Sequence[DoaEstimate], s0: Sequence[float], alpha: int) -> float:
    """
    Energy-weighted localization error of one recording.

    Returns || sum_l f(s_l) Y_l / sum_l Y_l - f(s0) ||, summed over the valid
    estimates, where f is the dimensionality mapping.

    Raises:
        EvaluationError: If there is no valid estimate or the total weight
            is not positive
        ValidationError: If s0 is not a unit vector
    """
    truth = map_direction(s0, alpha)
    valid = [e for e in estimates if e.valid]
    if not valid:
        raise EvaluationError("No valid estimate to evaluate", "NONPOSITIVE_WEIGHT")

    weights = np.array([e.energy for e in valid], dtype=np.float64)
    total = float(np.sum(weights))
    if not total > 0.0:
        raise EvaluationError(
            f"Total estimate energy is {total:g}; the recording is degenerate",
            "NONPOSITIVE_WEIGHT",
        )

    directions = np.array([e.direction for e in valid], dtype=np.float64)
    mapped = _map_rows(directions, alpha)
    mean = (weights[:, None] * mapped).sum(axis=0) / total
    return float(np.linalg.norm(mean - truth))


def agreement_rate(
    first: Sequence[DoaEstimate], second: Sequence[DoaEstimate]
) -> float:
    """Fraction of frames on which two estimate sequences pick the same index."""
    if len(first) != len(second):
        raise EvaluationError(
            f"Cannot compare {len(first)} estimates with {len(second)}",
            "LENGTH_MISMATCH",
        )
    if not first:
        return 1.0
    same = sum(a.index == b.index for a, b in zip(first, second))
    return same / len(first)
