"""
Tests for free-field scene simulation.
"""

import math

import numpy as np
import pytest
from scipy.signal import correlate, correlation_lags

from svdphat.exceptions import SignalError
from svdphat.geometry import MicPair, tdoa_farfield
from svdphat.models import ArrayConfig, SignalKind
from svdphat.simulation import (
    Scene,
    channel_delays,
    fractional_delay,
    make_source_signal,
    random_direction,
    random_scene,
    simulate_scene,
)
from svdphat.validation import ValidationError


def _peak_lag(reference: np.ndarray, other: np.ndarray) -> float:
    """Lag of `other` relative to `reference`, with parabolic refinement."""
    xc = correlate(other, reference, mode="full")
    lags = correlation_lags(other.size, reference.size, mode="full")
    i = int(np.argmax(xc))
    a, b, c = xc[i - 1], xc[i], xc[i + 1]
    return float(lags[i] + 0.5 * (a - c) / (a - 2 * b + c))


class TestSourceSignals:
    """Test synthetic source signals."""

    @pytest.mark.parametrize("kind", [SignalKind.NOISE, SignalKind.SWEEP])
    def test_unit_rms(self, kind, rng):
        """Test every family is scaled to unit RMS."""
        signal = make_source_signal(kind, 4000, rng, 16000)
        assert signal.shape == (4000,)
        assert np.sqrt(np.mean(signal**2)) == pytest.approx(1.0)

    def test_deterministic(self):
        """Test equal seeds give equal signals."""
        a = make_source_signal(SignalKind.SWEEP, 500, np.random.default_rng(3), 8000)
        b = make_source_signal(SignalKind.SWEEP, 500, np.random.default_rng(3), 8000)
        np.testing.assert_array_equal(a, b)

    def test_accepts_string_kind(self, rng):
        """Test kinds may be given by value."""
        assert make_source_signal("noise", 10, rng, 8000).size == 10

    def test_empty(self, rng):
        """Test zero-length signals are refused."""
        with pytest.raises(SignalError, match="at least one sample"):
            make_source_signal(SignalKind.NOISE, 0, rng, 8000)


class TestDelays:
    """Test per-channel delays."""

    def test_pair_difference_is_tdoa(self, tetra_config: ArrayConfig):
        """Test delay_i - delay_j equals the farfield TDOA of (i, j)."""
        u = np.array([0.48, -0.6, 0.64])
        delays = channel_delays(tetra_config, u)
        assert delays[0] == 0.0
        for i, j in [(0, 1), (1, 3), (2, 3)]:
            assert delays[i] - delays[j] == pytest.approx(
                tdoa_farfield(tetra_config, u, MicPair(i, j))
            )

    def test_fractional_delay_integer_shift(self, rng):
        """Test an integer delay is a plain shift."""
        signal = rng.standard_normal(256)
        delayed = fractional_delay(signal, np.array([0.0, 5.0]))
        np.testing.assert_allclose(delayed[0], signal, atol=1e-10)
        np.testing.assert_allclose(delayed[1, 5:], signal[:-5], atol=1e-10)
        np.testing.assert_allclose(delayed[1, :5], 0.0, atol=1e-10)

    def test_fractional_delay_negative(self, rng):
        """Test a negative delay advances the signal."""
        signal = rng.standard_normal(256)
        advanced = fractional_delay(signal, np.array([-3.0]))[0]
        np.testing.assert_allclose(advanced[:-3], signal[3:], atol=1e-10)


class TestScene:
    """Test the scene container."""

    def test_non_unit_direction(self, tetra_config: ArrayConfig):
        """Test the direction must have unit norm."""
        with pytest.raises(ValidationError, match="unit norm"):
            Scene(
                direction=np.array([1.0, 1.0, 0.0]),
                signal=np.ones(10),
                snr_db=10.0,
                seed=0,
                config=tetra_config,
            )

    @pytest.mark.parametrize("snr", [math.nan, -math.inf])
    def test_invalid_snr(self, tetra_config: ArrayConfig, snr):
        """Test NaN and -inf SNR are refused."""
        with pytest.raises(ValidationError, match="SNR") as exc_info:
            Scene(
                direction=np.array([0.0, 0.0, 1.0]),
                signal=np.ones(10),
                snr_db=snr,
                seed=0,
                config=tetra_config,
            )
        assert exc_info.value.error_code == "INVALID_SNR"

    def test_caller_arrays_stay_writeable(self, tetra_config: ArrayConfig):
        """Test the scene freezes its own copies, not the caller's arrays."""
        direction = np.array([0.0, 0.0, 1.0])
        signal = np.ones(10)
        scene = Scene(
            direction=direction,
            signal=signal,
            snr_db=10.0,
            seed=0,
            config=tetra_config,
        )
        assert direction.flags.writeable
        assert signal.flags.writeable
        assert not scene.direction.flags.writeable
        direction[2] = -1.0
        assert scene.direction[2] == 1.0

    def test_truth_record(self, tetra_config: ArrayConfig):
        """Test the ground-truth record mirrors the scene."""
        scene = random_scene(tetra_config, 7, 320, (5.0, 5.0), SignalKind.SWEEP)
        truth = scene.truth(grid_index=3)
        assert truth.snr_db == 5.0
        assert truth.seed == 7
        assert truth.n_samples == 320
        assert truth.signal_kind is SignalKind.SWEEP
        assert truth.array_label == "tetra"
        assert truth.grid_index == 3
        assert np.linalg.norm(truth.direction) == pytest.approx(1.0)


class TestRandomScene:
    """Test seeded scene generation."""

    def test_same_seed_same_scene(self, tetra_config: ArrayConfig):
        """Test scenes are fully determined by the seed."""
        a = simulate_scene(random_scene(tetra_config, 11, 800))
        b = simulate_scene(random_scene(tetra_config, 11, 800))
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self, tetra_config: ArrayConfig):
        """Test distinct seeds give distinct scenes."""
        a = random_scene(tetra_config, 1, 100)
        b = random_scene(tetra_config, 2, 100)
        assert not np.allclose(a.direction, b.direction)

    def test_snr_in_range(self, tetra_config: ArrayConfig):
        """Test the SNR is drawn from the given range."""
        for seed in range(20):
            assert 0.0 <= random_scene(tetra_config, seed, 10).snr_db <= 30.0

    def test_random_direction_unit(self, rng):
        """Test random directions have unit norm."""
        for _ in range(10):
            assert np.linalg.norm(random_direction(rng)) == pytest.approx(1.0)


class TestSimulateScene:
    """Test rendered microphone signals."""

    def test_shape(self, tetra_config: ArrayConfig):
        """Test one channel per microphone."""
        signals = simulate_scene(random_scene(tetra_config, 0, 1000))
        assert signals.shape == (4, 1000)

    def test_noiseless_cross_correlation_lags(self, pair_config: ArrayConfig, rng):
        """Test channel lags match the farfield TDOA of the source."""
        u = np.array([-0.3, 0.0, math.sqrt(1.0 - 0.09)])
        scene = Scene(
            direction=u,
            signal=make_source_signal(SignalKind.NOISE, 8000, rng, 16000),
            snr_db=math.inf,
            seed=0,
            config=pair_config,
        )
        x = simulate_scene(scene)
        tau = tdoa_farfield(pair_config, u, MicPair(0, 1))
        assert tau == pytest.approx(-4.8)
        assert _peak_lag(x[0], x[1]) == pytest.approx(-tau, abs=0.55)

    def test_snr_is_respected(self, tetra_config: ArrayConfig, rng):
        """Test the per-channel SNR of the rendered scene."""
        signal = make_source_signal(SignalKind.NOISE, 20000, rng, 16000)
        direction = np.array([0.0, 0.0, 1.0])
        noisy = Scene(
            direction=direction,
            signal=signal,
            snr_db=10.0,
            seed=5,
            config=tetra_config,
        )
        clean = Scene(
            direction=direction,
            signal=signal,
            snr_db=math.inf,
            seed=5,
            config=tetra_config,
        )
        x, s = simulate_scene(noisy), simulate_scene(clean)
        noise = x - s
        snr = 10 * np.log10(np.mean(s**2, axis=1) / np.mean(noise**2, axis=1))
        np.testing.assert_allclose(snr, 10.0, atol=0.3)

    def test_empty_signal(self, tetra_config: ArrayConfig):
        """Test an empty source is refused."""
        scene = Scene(
            direction=np.array([1.0, 0.0, 0.0]),
            signal=np.zeros(0),
            snr_db=0.0,
            seed=0,
            config=tetra_config,
        )
        with pytest.raises(SignalError, match="empty"):
            simulate_scene(scene)
