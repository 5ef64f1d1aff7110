"""
SVD-PHAT model: low-rank factorization of the steering matrix.

Offline, W (Q x P(N/2+1)) is decomposed as W = U S V^H and truncated to the
smallest rank K that keeps a (1 - delta) share of its Frobenius energy. The
rows of D = U S are normalized and indexed by a k-d tree.

Online, a cross-spectrum X is projected to Z = V^H X and the grid point
maximizing Re{D_q Z} is found as the nearest normalized dictionary row to
conj(Z / ||Z||), because for unit vectors
Re{a . b} = 1 - ||a - conj(b)||^2 / 2. The returned energy is computed from
the exact row of W.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import DimensionMismatchError, ModelBuildError
from .geometry import ScanGrid
from .models import ArrayConfig, DoaEstimate, Method
from .nn_index import DEFAULT_LEAF_SIZE, NnIndex
from .spectral import CrossSpectrumLike, CrossSpectrumVector, as_vector
from .srp import SteeringMatrix, steering_rows
from .validation import validate_delta


@dataclass(frozen=True, eq=False)
class SteeringDecomposition:
    """Thin SVD of a steering matrix, computed once per geometry."""

    u: np.ndarray
    singular_values: np.ndarray
    vh: np.ndarray
    total_energy: float

    @property
    def max_rank(self) -> int:
        return int(self.singular_values.size)


def decompose(W: SteeringMatrix) -> SteeringDecomposition:
    """
    Thin SVD of W in complex arithmetic.

    Raises:
        ModelBuildError: If the decomposition does not converge
    """
    coefficients = W.coefficients
    try:
        u, s, vh = np.linalg.svd(coefficients, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise ModelBuildError(f"SVD of the steering matrix failed: {e}")

    total = float(np.sum(np.abs(coefficients) ** 2))
    return SteeringDecomposition(u=u, singular_values=s, vh=vh, total_energy=total)


def rank_for_delta(
    singular_values: np.ndarray, total_energy: float, delta: float
) -> int:
    """
    Smallest K such that sum_{k<=K} s_k^2 >= (1 - delta) * total_energy.

    Raises:
        ValidationError: If delta is outside (0, 1)
    """
    delta = validate_delta(delta)
    s = np.asarray(singular_values, dtype=np.float64)
    if s.size == 0:
        raise ModelBuildError("Steering matrix has no singular values")

    cumulative = np.cumsum(s * s)
    target = (1.0 - delta) * total_energy
    rank = int(np.searchsorted(cumulative, target, side="left")) + 1
    return min(max(rank, 1), int(s.size))


def rank_profile(
    decomposition: SteeringDecomposition, deltas: Sequence[float]
) -> List[int]:
    """K(delta) for each tolerance, in the order given."""
    return [
        rank_for_delta(decomposition.singular_values, decomposition.total_energy, d)
        for d in deltas
    ]


@dataclass(frozen=True, eq=False)
class Projection:
    """Projected observation Z = V^H X and its normalized form."""

    z: np.ndarray
    z_hat: np.ndarray
    norm: float

    @property
    def degenerate(self) -> bool:
        return not self.norm > 0.0


@dataclass(frozen=True, eq=False)
class SvdPhatModel:
    """Fitted model; immutable and safe to share between threads."""

    projection: np.ndarray
    dictionary: np.ndarray
    row_norms: np.ndarray
    rank: int
    delta: float
    singular_values: np.ndarray
    total_energy: float
    nn_index: NnIndex
    grid: ScanGrid
    steering: Optional[SteeringMatrix] = None
    config: Optional[ArrayConfig] = None

    def __post_init__(self) -> None:
        for name in ("projection", "dictionary", "row_norms", "singular_values"):
            getattr(self, name).setflags(write=False)
        if self.steering is None and self.config is None:
            raise ModelBuildError(
                "A model without stored steering rows needs an array config"
            )

    @classmethod
    def fit(
        cls,
        W: SteeringMatrix,
        delta: float,
        decomposition: Optional[SteeringDecomposition] = None,
        leaf_size: int = DEFAULT_LEAF_SIZE,
        store_steering: bool = True,
        config: Optional[ArrayConfig] = None,
    ) -> "SvdPhatModel":
        """
        Fit the model for one tolerance.

        Args:
            W: Steering matrix
            delta: Tolerable share of lost singular energy, in (0, 1)
            decomposition: Precomputed decompose(W), reused across a delta sweep
            leaf_size: k-d tree leaf size
            store_steering: Keep W for exact energy lookup; otherwise rows
                are recomputed from the array config on demand
            config: Array config, defaults to the one W was built from

        Raises:
            ValidationError: If delta is outside (0, 1)
            ModelBuildError: If the SVD fails or a dictionary row vanishes
        """
        delta = validate_delta(delta)
        if decomposition is None:
            decomposition = decompose(W)

        rank = rank_for_delta(
            decomposition.singular_values, decomposition.total_energy, delta
        )
        s = decomposition.singular_values[:rank]
        d = decomposition.u[:, :rank] * s[None, :]
        row_norms = np.linalg.norm(d, axis=1)
        if np.any(row_norms <= 0.0):
            zero = int(np.flatnonzero(row_norms <= 0.0)[0])
            raise ModelBuildError(
                f"Dictionary row {zero} has zero norm at rank {rank}; "
                "the steering matrix has an all-zero row"
            )

        dictionary = np.ascontiguousarray(d / row_norms[:, None])
        return cls(
            projection=np.ascontiguousarray(decomposition.vh[:rank]),
            dictionary=dictionary,
            row_norms=row_norms,
            rank=rank,
            delta=delta,
            singular_values=np.array(decomposition.singular_values, dtype=np.float64),
            total_energy=decomposition.total_energy,
            nn_index=NnIndex.build(dictionary, leaf_size=leaf_size),
            grid=W.grid,
            steering=W if store_steering else None,
            config=config if config is not None else W.config,
        )

    @property
    def n_points(self) -> int:
        return self.grid.size

    @property
    def n_columns(self) -> int:
        return int(self.projection.shape[1])

    @property
    def basis(self) -> np.ndarray:
        """Projection basis V, shape (P(N/2+1), K)."""
        return self.projection.conj().T

    @property
    def gain(self) -> float:
        """Row reduction Q/K."""
        return self.n_points / self.rank

    @property
    def norm_ratio(self) -> float:
        """max ||D_q|| / min ||D_q||; close to 1 for small delta."""
        return float(self.row_norms.max() / self.row_norms.min())

    @property
    def retained_energy(self) -> float:
        """Share of ||W||_F^2 kept by the first K singular values."""
        s = self.singular_values[: self.rank]
        return float(np.sum(s * s) / self.total_energy)

    @property
    def reconstruction_error(self) -> float:
        """Relative squared Frobenius error of the rank-K approximation."""
        return max(0.0, 1.0 - self.retained_energy)

    def _check_columns(self, x: np.ndarray) -> None:
        if x.shape[-1] != self.n_columns:
            raise DimensionMismatchError(
                f"Cross-spectrum has {x.shape[-1]} entries, model expects "
                f"{self.n_columns}"
            )

    def project(self, X: CrossSpectrumLike) -> Projection:
        """
        Project a cross-spectrum onto the retained basis.

        Raises:
            DimensionMismatchError: If X does not have P(N/2+1) entries
        """
        x = as_vector(X).reshape(-1)
        self._check_columns(x)

        z = self.projection @ x
        norm = float(np.linalg.norm(z))
        z_hat = z / norm if norm > 0.0 else np.zeros_like(z)
        return Projection(z=z, z_hat=z_hat, norm=norm)

    def steering_row(self, index: int) -> np.ndarray:
        """Exact row q of W, recomputed from geometry when W is not stored."""
        if self.steering is not None:
            return self.steering.row(index)
        assert self.config is not None
        return steering_rows(self.config, self.grid.points[index])[0]

    def _estimate(
        self, projection: Projection, x: np.ndarray, frame: int
    ) -> DoaEstimate:
        if projection.degenerate:
            return DoaEstimate.invalid(frame, Method.SVD)

        index, _ = self.nn_index.nearest(np.conj(projection.z_hat))
        energy = float(np.real(self.steering_row(index) @ x))
        return DoaEstimate(
            frame=frame,
            index=index,
            direction=self.grid.direction(index),
            energy=energy,
            method=Method.SVD,
        )

    def localize(
        self, X: CrossSpectrumLike, frame: Optional[int] = None
    ) -> DoaEstimate:
        """
        SVD-PHAT estimate for one frame.

        An all-zero projection yields an estimate flagged invalid with zero
        energy.
        """
        if frame is None:
            frame = X.frame if isinstance(X, CrossSpectrumVector) else 0
        x = as_vector(X).reshape(-1)
        return self._estimate(self.project(x), x, frame)

    def localize_frames(
        self, frames: np.ndarray, first_frame: int = 0
    ) -> List[DoaEstimate]:
        """SVD-PHAT over a stack of cross-spectra, shape (L, P(N/2+1))."""
        x = np.atleast_2d(np.asarray(frames, dtype=np.complex128))
        self._check_columns(x)

        z = x @ self.projection.T
        norms = np.linalg.norm(z, axis=1)
        estimates = []
        for offset in range(x.shape[0]):
            norm = float(norms[offset])
            z_hat = z[offset] / norm if norm > 0.0 else np.zeros_like(z[offset])
            projection = Projection(z=z[offset], z_hat=z_hat, norm=norm)
            frame = first_frame + offset
            estimates.append(self._estimate(projection, x[offset], frame))
        return estimates
