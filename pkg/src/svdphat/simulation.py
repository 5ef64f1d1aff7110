"""
Free-field multichannel scene simulation.

A farfield source is delayed onto every microphone with a fractional delay
applied as a phase ramp over the whole signal, then independent white
Gaussian noise is added per channel at the scene's SNR. Delays are measured
relative to microphone 0.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.signal import chirp

from .exceptions import SignalError
from .models import ArrayConfig, SceneTruth, SignalKind
from .validation import ValidationError, validate_unit_vector

SWEEP_COMPONENTS = 3


@dataclass(frozen=True, eq=False)
class Scene:
    """A single source at direction s0 observed by one array."""

    direction: np.ndarray
    signal: np.ndarray
    snr_db: float
    seed: int
    config: ArrayConfig
    signal_kind: SignalKind = SignalKind.NOISE

    def __post_init__(self) -> None:
        direction = np.array(validate_unit_vector(self.direction, "scene direction"))
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValidationError(
                f"SNR must be a number or +inf (noiseless), got {self.snr_db}",
                "INVALID_SNR",
            )
        signal = np.array(self.signal, dtype=np.float64).reshape(-1)
        direction.setflags(write=False)
        signal.setflags(write=False)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "signal", signal)

    @property
    def n_samples(self) -> int:
        return int(self.signal.size)

    def truth(self, grid_index: Optional[int] = None) -> SceneTruth:
        """Ground-truth record for the scene."""
        x, y, z = (float(c) for c in self.direction)
        return SceneTruth(
            direction=(x, y, z),
            snr_db=self.snr_db,
            seed=self.seed,
            signal_kind=self.signal_kind,
            sample_rate=self.config.sample_rate,
            n_samples=self.n_samples,
            array_label=self.config.label,
            grid_index=grid_index,
        )


def make_source_signal(
    kind: SignalKind,
    n_samples: int,
    rng: np.random.Generator,
    sample_rate: float,
) -> np.ndarray:
    """
    Synthetic wideband source with unit RMS.

    ``noise`` is white Gaussian noise. ``sweep`` sums linear chirps with
    random start and stop frequencies and random initial phases.

    Raises:
        SignalError: If n_samples is not positive
    """
    if n_samples < 1:
        raise SignalError("Source signal must have at least one sample", "EMPTY_SIGNAL")

    kind = SignalKind(kind)
    if kind is SignalKind.NOISE:
        signal = rng.standard_normal(n_samples)
    else:
        t = np.arange(n_samples) / sample_rate
        duration = max(t[-1], 1.0 / sample_rate)
        signal = np.zeros(n_samples)
        for _ in range(SWEEP_COMPONENTS):
            f0 = rng.uniform(100.0, 0.1 * sample_rate)
            f1 = rng.uniform(0.2 * sample_rate, 0.45 * sample_rate)
            phase = rng.uniform(0.0, 360.0)
            signal += chirp(t, f0=f0, t1=duration, f1=f1, method="linear", phi=phase)

    rms = float(np.sqrt(np.mean(signal * signal)))
    return signal / rms if rms > 0.0 else signal


def random_direction(rng: np.random.Generator) -> np.ndarray:
    """Direction drawn uniformly on the unit sphere."""
    while True:
        v = rng.standard_normal(3)
        norm = float(np.linalg.norm(v))
        if norm > 1e-12:
            return v / norm


def random_scene(
    config: ArrayConfig,
    seed: int,
    n_samples: int,
    snr_range: Tuple[float, float] = (0.0, 30.0),
    kind: SignalKind = SignalKind.NOISE,
) -> Scene:
    """Scene with a uniformly drawn direction and SNR; fully determined by seed."""
    rng = np.random.default_rng(seed)
    direction = random_direction(rng)
    snr_db = float(rng.uniform(snr_range[0], snr_range[1]))
    signal = make_source_signal(
        kind, n_samples, np.random.default_rng([seed, 0]), config.sample_rate
    )
    return Scene(
        direction=direction,
        signal=signal,
        snr_db=snr_db,
        seed=seed,
        config=config,
        signal_kind=kind,
    )


def channel_delays(
    config: ArrayConfig, direction: np.ndarray, reference: int = 0
) -> np.ndarray:
    """
    Arrival delay of each microphone relative to the reference, in samples.

    A plane wave from direction u reaches microphone m at a delay of
    (f_S/c)(r_ref - r_m) . u, so the pair TDOA (r_j - r_i) . u f_S/c equals
    delay_i - delay_j.
    """
    u = validate_unit_vector(direction)
    positions = config.positions
    return config.samples_per_meter * ((positions[reference] - positions) @ u)


def fractional_delay(signal: np.ndarray, delays: np.ndarray) -> np.ndarray:
    """
    Delay one signal by several fractional amounts with a phase ramp.

    The signal is zero padded past its end by more than the largest delay so
    that the circular shift never wraps signal content into the kept part.
    """
    n = signal.size
    pad = int(np.ceil(np.max(np.abs(delays)))) + 1
    n_fft = sp_fft.next_fast_len(n + pad, real=True)

    spectrum = np.fft.rfft(signal, n=n_fft)
    freqs = np.arange(spectrum.size) / n_fft
    ramps = np.exp(-2j * np.pi * freqs[None, :] * np.asarray(delays)[:, None])
    return np.fft.irfft(spectrum[None, :] * ramps, n=n_fft, axis=-1)[:, :n]


def simulate_scene(scene: Scene) -> np.ndarray:
    """
    Render the M microphone signals of a scene.

    Returns:
        Array of shape (M, samples)

    Raises:
        SignalError: If the source signal is empty
    """
    if scene.n_samples == 0:
        raise SignalError("Scene signal is empty", "EMPTY_SIGNAL")

    delays = channel_delays(scene.config, scene.direction)
    clean = fractional_delay(scene.signal, delays)
    if scene.snr_db == math.inf:
        return clean

    rng = np.random.default_rng([scene.seed, 1])
    power = np.mean(clean * clean, axis=1, keepdims=True)
    scale = np.sqrt(power / 10.0 ** (scene.snr_db / 10.0))
    return clean + scale * rng.standard_normal(clean.shape)
