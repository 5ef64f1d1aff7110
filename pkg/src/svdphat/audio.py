"""
Multichannel WAV input and output.

Recordings are exchanged as float64 arrays of shape (channels, samples).
Integer PCM is scaled to [-1, 1) by soundfile.
"""

from pathlib import Path
from typing import Tuple, Union

import numpy as np
import soundfile as sf

from .exceptions import AudioFormatError
from .models import ArrayConfig
from .validation import validate_file_path, validate_output_path

SUPPORTED_SUBTYPES = ("PCM_16", "PCM_24", "PCM_32", "FLOAT", "DOUBLE")


def read_wav(path: Union[str, Path]) -> Tuple[np.ndarray, int]:
    """
    Read a WAV file.

    Returns:
        (signals of shape (channels, samples), sample rate)

    Raises:
        ValidationError: If the file does not exist
        AudioFormatError: If the file is unreadable or its encoding unsupported
    """
    resolved = validate_file_path(path, "WAV file")

    try:
        info = sf.info(str(resolved))
        if info.subtype not in SUPPORTED_SUBTYPES:
            raise AudioFormatError(
                f"Unsupported WAV encoding {info.subtype} in {resolved}; "
                f"expected one of {', '.join(SUPPORTED_SUBTYPES)}",
                "UNSUPPORTED_ENCODING",
            )
        samples, sample_rate = sf.read(
            str(resolved), dtype="float64", always_2d=True
        )
    except RuntimeError as e:
        raise AudioFormatError(f"Could not read WAV file {resolved}: {e}")

    return np.ascontiguousarray(samples.T), int(sample_rate)


def check_wav_matches(
    signals: np.ndarray, sample_rate: int, config: ArrayConfig
) -> None:
    """
    Check a recording against the array configuration.

    Raises:
        AudioFormatError: On a channel count or sample rate mismatch
    """
    channels = signals.shape[0]
    if channels != config.n_mics:
        raise AudioFormatError(
            f"Recording has {channels} channel(s), expected {config.n_mics} "
            f"(one per microphone of array '{config.label}')",
            "CHANNEL_COUNT_MISMATCH",
        )

    if sample_rate != config.sample_rate:
        raise AudioFormatError(
            f"Recording sample rate is {sample_rate} Hz, expected "
            f"{config.sample_rate:g} Hz",
            "SAMPLE_RATE_MISMATCH",
        )


def write_wav(
    path: Union[str, Path],
    signals: np.ndarray,
    sample_rate: float,
    subtype: str = "FLOAT",
) -> Path:
    """
    Write a (channels, samples) array as a multichannel WAV file.

    Raises:
        ValidationError: If the output directory does not exist
        AudioFormatError: If the subtype is unsupported or writing fails
    """
    resolved = validate_output_path(path)
    subtype = subtype.upper()
    if subtype not in SUPPORTED_SUBTYPES:
        raise AudioFormatError(
            f"Unsupported WAV encoding {subtype}; "
            f"expected one of {', '.join(SUPPORTED_SUBTYPES)}",
            "UNSUPPORTED_ENCODING",
        )

    data = np.atleast_2d(np.asarray(signals, dtype=np.float64)).T
    if subtype.startswith("PCM") and np.max(np.abs(data), initial=0.0) >= 1.0:
        raise AudioFormatError(
            "Samples exceed the integer PCM range [-1, 1); use FLOAT or DOUBLE",
            "CLIPPING",
        )

    try:
        sf.write(str(resolved), data, int(round(sample_rate)), subtype=subtype)
    except RuntimeError as e:
        raise AudioFormatError(f"Could not write WAV file {resolved}: {e}")

    return resolved
