"""
Steering matrix construction and the exact SRP-PHAT baseline.

Row q of the steering matrix W holds exp(2 pi j k tau_{q,i,j} / N) for every
pair and bin, in the same pair-major order as the cross-spectrum vector, so
that the SRP-PHAT energy map is Y = Re{W X}.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import DimensionMismatchError, SteeringMemoryError
from .geometry import ScanGrid, farfield_tdoa_matrix
from .models import ArrayConfig, DoaEstimate, Method
from .spectral import CrossSpectrumLike, CrossSpectrumVector, as_vector

COMPLEX_BYTES = np.dtype(np.complex128).itemsize
DEFAULT_MAX_STEERING_BYTES = 1024 * 1024 * 1024


@dataclass(frozen=True, eq=False)
class SteeringMatrix:
    """Q x P(N/2+1) complex matrix of SRP-PHAT coefficients, row-major."""

    coefficients: np.ndarray
    grid: ScanGrid
    n_pairs: int
    n_bins: int
    config: Optional[ArrayConfig] = None

    def __post_init__(self) -> None:
        coefficients = np.ascontiguousarray(self.coefficients, dtype=np.complex128)
        expected = (self.grid.size, self.n_pairs * self.n_bins)
        if coefficients.shape != expected:
            raise DimensionMismatchError(
                f"Steering matrix has shape {coefficients.shape}, expected {expected}"
            )
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n_points(self) -> int:
        return self.grid.size

    @property
    def n_columns(self) -> int:
        return self.n_pairs * self.n_bins

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_points, self.n_columns)

    def row(self, index: int) -> np.ndarray:
        return self.coefficients[index]


def steering_nbytes(config: ArrayConfig, grid: ScanGrid) -> int:
    """Memory needed for the dense steering matrix."""
    return grid.size * config.n_columns * COMPLEX_BYTES


def steering_rows(config: ArrayConfig, directions: np.ndarray) -> np.ndarray:
    """Steering coefficients for arbitrary unit directions, shape (S, P(N/2+1))."""
    tau = farfield_tdoa_matrix(config, np.atleast_2d(directions))
    k = np.arange(config.n_bins, dtype=np.float64)
    phase = (2.0 * np.pi / config.frame_size) * tau[:, :, None] * k[None, None, :]
    return np.exp(1j * phase).reshape(tau.shape[0], config.n_columns)


def build_steering_matrix(
    config: ArrayConfig,
    grid: ScanGrid,
    max_bytes: Optional[int] = None,
) -> SteeringMatrix:
    """
    Build W from the farfield TDOAs of every grid point.

    Args:
        config: Array configuration
        grid: Scan grid
        max_bytes: Memory cap for the dense matrix

    Returns:
        SteeringMatrix of shape (Q, P(N/2+1))

    Raises:
        SteeringMemoryError: If the matrix would exceed the memory cap
    """
    cap = DEFAULT_MAX_STEERING_BYTES if max_bytes is None else max_bytes
    needed = steering_nbytes(config, grid)
    if needed > cap:
        raise SteeringMemoryError(
            f"Steering matrix {grid.size} x {config.n_columns} needs "
            f"{needed / 2**20:.1f} MB, above the {cap / 2**20:.1f} MB cap "
            "(raise SVDPHAT_MAX_STEERING_MB or use a coarser grid)"
        )

    return SteeringMatrix(
        coefficients=steering_rows(config, grid.points),
        grid=grid,
        n_pairs=config.n_pairs,
        n_bins=config.n_bins,
        config=config,
    )


def _check_columns(expected: int, x: np.ndarray) -> None:
    if x.shape[-1] != expected:
        raise DimensionMismatchError(
            f"Cross-spectrum has {x.shape[-1]} entries, steering matrix expects "
            f"{expected}"
        )


def srp_energy_map(W: SteeringMatrix, X: CrossSpectrumLike) -> np.ndarray:
    """
    SRP-PHAT energy Y = Re{W X}.

    Accepts a single cross-spectrum (returns shape (Q,)) or a stack of frames
    with shape (L, P(N/2+1)) (returns shape (L, Q)).

    Raises:
        DimensionMismatchError: If X does not have P(N/2+1) entries
    """
    x = as_vector(X)
    if x.ndim not in (1, 2):
        raise DimensionMismatchError(
            f"Cross-spectrum must be 1-D or 2-D, got {x.shape}"
        )
    _check_columns(W.n_columns, x)

    if x.ndim == 1:
        return (W.coefficients @ x).real
    return (x @ W.coefficients.T).real


def srp_localize(
    W: SteeringMatrix,
    X: CrossSpectrumLike,
    grid: Optional[ScanGrid] = None,
    frame: Optional[int] = None,
) -> DoaEstimate:
    """
    Exact SRP-PHAT estimate: the grid point with the largest energy.

    Ties go to the lowest index. A cross-spectrum with no nonzero entry
    yields an estimate flagged invalid.
    """
    grid = grid if grid is not None else W.grid
    x = as_vector(X)
    if frame is None:
        frame = X.frame if isinstance(X, CrossSpectrumVector) else 0

    energies = srp_energy_map(W, x)
    if not np.any(x):
        return DoaEstimate.invalid(frame, Method.SRP)

    index = int(np.argmax(energies))
    return DoaEstimate(
        frame=frame,
        index=index,
        direction=grid.direction(index),
        energy=float(energies[index]),
        method=Method.SRP,
    )


def srp_localize_frames(
    W: SteeringMatrix, frames: np.ndarray, first_frame: int = 0
) -> List[DoaEstimate]:
    """Exact SRP-PHAT over a stack of cross-spectra, shape (L, P(N/2+1))."""
    return [
        srp_localize(W, x, frame=first_frame + offset)
        for offset, x in enumerate(np.atleast_2d(frames))
    ]


def self_match_inputs(W: SteeringMatrix, indices: Sequence[int]) -> np.ndarray:
    """Conjugated steering rows; each one peaks exactly at its own grid point."""
    return np.conj(W.coefficients[np.asarray(indices, dtype=np.intp)])
