"""
STFT front-end and phase-transform cross-spectra.

Frame l covers samples [l * hop, l * hop + N) of every channel, weighted by
the sine window and transformed with a real FFT that keeps bins 0..N/2.
Cross-spectra are laid out pair-major: all bins of pair (0,1), then (0,2),
and so on.
"""

from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np
from scipy.signal import windows

from .exceptions import DimensionMismatchError, SignalError
from .geometry import mic_pairs
from .models import ArrayConfig


@dataclass(frozen=True, eq=False)
class SpectrumFrame:
    """Per-channel spectra of one frame, shape (channels, N/2+1)."""

    spectra: np.ndarray
    index: int = 0

    def __post_init__(self) -> None:
        spectra = np.array(self.spectra, dtype=np.complex128)
        if spectra.ndim != 2:
            raise SignalError(
                f"Frame spectra must be 2-D (channels, bins), got {spectra.shape}",
                "INVALID_FRAME",
            )
        spectra.setflags(write=False)
        object.__setattr__(self, "spectra", spectra)

    @property
    def n_channels(self) -> int:
        return int(self.spectra.shape[0])

    @property
    def n_bins(self) -> int:
        return int(self.spectra.shape[1])


@dataclass(frozen=True, eq=False)
class CrossSpectrumVector:
    """Concatenated PHAT cross-spectra X of length P(N/2+1)."""

    values: np.ndarray
    n_pairs: int
    n_bins: int
    frame: int = 0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128).reshape(-1)
        if values.size != self.n_pairs * self.n_bins:
            raise DimensionMismatchError(
                f"Cross-spectrum has {values.size} entries, expected "
                f"{self.n_pairs} pairs x {self.n_bins} bins"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


CrossSpectrumLike = Union[CrossSpectrumVector, np.ndarray]


def as_vector(x: CrossSpectrumLike) -> np.ndarray:
    """Return the complex values behind a cross-spectrum (or raw array)."""
    if isinstance(x, CrossSpectrumVector):
        return x.values
    return np.asarray(x, dtype=np.complex128)


def sine_window(frame_size: int) -> np.ndarray:
    """Sine analysis window w[n] = sin(pi (n + 0.5) / N)."""
    return windows.cosine(frame_size, sym=True)


def _stack_channels(signals: Union[np.ndarray, Sequence[np.ndarray]]) -> np.ndarray:
    if isinstance(signals, np.ndarray):
        x = np.asarray(signals, dtype=np.float64)
        return x[None, :] if x.ndim == 1 else x

    channels = [np.asarray(s, dtype=np.float64).reshape(-1) for s in signals]
    if not channels:
        raise SignalError("At least one channel is required", "EMPTY_SIGNAL")
    lengths = {c.size for c in channels}
    if len(lengths) > 1:
        raise SignalError(
            f"All channels must have equal length, got {sorted(lengths)}",
            "CHANNEL_LENGTH_MISMATCH",
        )
    return np.vstack(channels)


def stft(
    signals: Union[np.ndarray, Sequence[np.ndarray]], config: ArrayConfig
) -> np.ndarray:
    """
    Short-time Fourier transform of a multichannel recording.

    Args:
        signals: Array of shape (channels, samples) or a list of channels
        config: Array configuration providing N and the hop size

    Returns:
        Complex array of shape (frames, channels, N/2+1)

    Raises:
        SignalError: If channel lengths differ or are shorter than N
    """
    x = _stack_channels(signals)
    if x.ndim != 2:
        raise SignalError(
            f"Signals must be 2-D (channels, samples), got {x.shape}", "INVALID_SIGNAL"
        )

    n = config.frame_size
    if x.shape[1] < n:
        raise SignalError(
            f"Signal has {x.shape[1]} samples, shorter than one frame ({n})",
            "SIGNAL_TOO_SHORT",
        )

    frames = np.lib.stride_tricks.sliding_window_view(x, n, axis=1)
    frames = frames[:, :: config.hop_size, :]
    spectra = np.fft.rfft(frames * sine_window(n), axis=-1)
    return np.ascontiguousarray(spectra.transpose(1, 0, 2))


def stft_frames(
    signals: Union[np.ndarray, Sequence[np.ndarray]], config: ArrayConfig
) -> List[SpectrumFrame]:
    """STFT as a list of SpectrumFrame objects, one per hop."""
    spectra = stft(signals, config)
    return [SpectrumFrame(spectra=s, index=i) for i, s in enumerate(spectra)]


def _phase(spectra: np.ndarray) -> np.ndarray:
    magnitudes = np.abs(spectra)
    phase = np.zeros_like(spectra)
    np.divide(spectra, magnitudes, out=phase, where=magnitudes > 0)
    return phase


def normalized_cross_spectrum(xi: np.ndarray, xj: np.ndarray) -> np.ndarray:
    """
    PHAT cross-spectrum of one pair: X_i X_j* / (|X_i| |X_j|).

    Bins where either magnitude is zero are set to 0.
    """
    return _phase(np.asarray(xi, dtype=np.complex128)) * np.conj(
        _phase(np.asarray(xj, dtype=np.complex128))
    )


def cross_spectra(spectra: np.ndarray) -> np.ndarray:
    """
    PHAT cross-spectra for a batch of frames.

    Args:
        spectra: Complex array of shape (frames, M, N/2+1)

    Returns:
        Complex array of shape (frames, P(N/2+1)), pair-major
    """
    spectra = np.asarray(spectra, dtype=np.complex128)
    n_frames, n_channels, n_bins = spectra.shape
    pairs = np.array(mic_pairs(n_channels), dtype=np.intp).reshape(-1, 2)
    phase = _phase(spectra)
    cross = phase[:, pairs[:, 0], :] * np.conj(phase[:, pairs[:, 1], :])
    return cross.reshape(n_frames, pairs.shape[0] * n_bins)


def cross_spectrum(frame: SpectrumFrame) -> CrossSpectrumVector:
    """PHAT cross-spectrum vector X of a single frame."""
    n_pairs = frame.n_channels * (frame.n_channels - 1) // 2
    values = cross_spectra(frame.spectra[None, :, :])[0]
    return CrossSpectrumVector(
        values=values, n_pairs=n_pairs, n_bins=frame.n_bins, frame=frame.index
    )
