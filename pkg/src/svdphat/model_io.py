"""
Binary container for fitted SVD-PHAT models.

Layout (all integers and floats little-endian):

    header    magic b"SVDPHAT\\0", u32 version, u32 M, N, hop, Q, K, leaf size,
              f64 sample rate, speed of sound, delta, u32 flags,
              32-byte sha256 of the geometry (mics, f_S, c, grid points)
    sections  4-byte tag, u64 payload length, payload, sha256 of payload
    trailer   b"END!" followed by the sha256 of every preceding byte

Sections appear in this order: META (JSON), MICS (M x 3 f64),
GRID (Q x 3 f64), SVAL (total energy then singular values, f64),
BASE (K x D c128), DICT (Q x K c128), NORM (Q f64), STEE (Q x D c128, only
when flag bit 0 is set) and NNIX (k-d tree arrays). D = P(N/2+1).
Arrays are stored as raw bytes, so a round trip is bit-exact.
"""

import hashlib
import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from .exceptions import ModelFileError
from .geometry import ScanGrid
from .models import ArrayConfig
from .nn_index import NnIndex
from .srp import SteeringMatrix
from .svd_model import SvdPhatModel

MAGIC = b"SVDPHAT\0"
FORMAT_VERSION = 1
TRAILER_TAG = b"END!"
FLAG_STEERING = 1

_HEADER = struct.Struct("<8sIIIIIIIdddI32s")
_SECTION = struct.Struct("<4sQ")
_DIGEST_SIZE = 32
_TRAILER_SIZE = len(TRAILER_TAG) + _DIGEST_SIZE

_F8 = np.dtype("<f8")
_C16 = np.dtype("<c16")
_I8 = np.dtype("<i8")

_NN_INT_ARRAYS = ("order", "split_dim", "left", "right", "start", "stop")


def geometry_digest(config: ArrayConfig, grid: ScanGrid) -> bytes:
    """sha256 over the microphone positions, f_S, c and the grid points."""
    h = hashlib.sha256()
    h.update(config.positions.astype(_F8).tobytes())
    h.update(struct.pack("<dd", config.sample_rate, config.speed_of_sound))
    h.update(grid.points.astype(_F8).tobytes())
    return h.digest()


def _raw(array: np.ndarray, dtype: np.dtype) -> bytes:
    return np.ascontiguousarray(array, dtype=dtype).tobytes()


def _nn_payload(index: NnIndex) -> bytes:
    arrays = index.to_arrays()
    parts = [struct.pack("<QQ", index.n_nodes, index.points.shape[1])]
    parts.append(_raw(arrays["points"], _F8))
    parts.append(_raw(arrays["split_value"], _F8))
    parts.extend(_raw(arrays[key], _I8) for key in _NN_INT_ARRAYS)
    return b"".join(parts)


def save_model(model: SvdPhatModel, path: Union[str, Path]) -> Path:
    """
    Write a fitted model to disk.

    Raises:
        ModelFileError: If the model has no array config or the file cannot
            be written
    """
    config = model.config
    if config is None:
        raise ModelFileError("Only models with an array config can be saved")

    grid = model.grid
    flags = FLAG_STEERING if model.steering is not None else 0
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        config.n_mics,
        config.frame_size,
        config.hop_size,
        grid.size,
        model.rank,
        model.nn_index.leaf_size,
        config.sample_rate,
        config.speed_of_sound,
        model.delta,
        flags,
        geometry_digest(config, grid),
    )

    meta = {"label": config.label, "grid_level": grid.level}
    sections: List[Tuple[bytes, bytes]] = [
        (b"META", json.dumps(meta, sort_keys=True).encode("utf-8")),
        (b"MICS", _raw(config.positions, _F8)),
        (b"GRID", _raw(grid.points, _F8)),
        (
            b"SVAL",
            _raw(np.concatenate([[model.total_energy], model.singular_values]), _F8),
        ),
        (b"BASE", _raw(model.projection, _C16)),
        (b"DICT", _raw(model.dictionary, _C16)),
        (b"NORM", _raw(model.row_norms, _F8)),
    ]
    if model.steering is not None:
        sections.append((b"STEE", _raw(model.steering.coefficients, _C16)))
    sections.append((b"NNIX", _nn_payload(model.nn_index)))

    body = bytearray(header)
    for tag, payload in sections:
        body += _SECTION.pack(tag, len(payload))
        body += payload
        body += hashlib.sha256(payload).digest()
    body += TRAILER_TAG
    body += hashlib.sha256(bytes(body)).digest()

    target = Path(path).expanduser()
    try:
        target.write_bytes(bytes(body))
    except OSError as e:
        raise ModelFileError(f"Could not write model file {target}: {e}")
    return target


def _read_bytes(path: Union[str, Path]) -> bytes:
    target = Path(path).expanduser()
    try:
        return target.read_bytes()
    except OSError as e:
        raise ModelFileError(f"Could not read model file {target}: {e}")


def _parse_header(data: bytes) -> Dict[str, Any]:
    if len(data) < _HEADER.size or not data.startswith(MAGIC):
        raise ModelFileError("Not an svdphat model file", "MODEL_FORMAT_ERROR")

    (
        _,
        version,
        n_mics,
        frame_size,
        hop_size,
        n_points,
        rank,
        leaf_size,
        sample_rate,
        speed_of_sound,
        delta,
        flags,
        digest,
    ) = _HEADER.unpack_from(data)

    if version != FORMAT_VERSION:
        raise ModelFileError(
            f"Model file version {version} is not supported "
            f"(expected {FORMAT_VERSION})",
            "MODEL_VERSION_MISMATCH",
        )

    return {
        "n_mics": n_mics,
        "frame_size": frame_size,
        "hop_size": hop_size,
        "n_points": n_points,
        "rank": rank,
        "leaf_size": leaf_size,
        "sample_rate": sample_rate,
        "speed_of_sound": speed_of_sound,
        "delta": delta,
        "flags": flags,
        "digest": digest,
    }


def _verify_trailer(data: bytes) -> None:
    if len(data) < _HEADER.size + _TRAILER_SIZE:
        raise ModelFileError("Model file is truncated", "MODEL_CHECKSUM_MISMATCH")

    tag_at = len(data) - _TRAILER_SIZE
    if data[tag_at : tag_at + len(TRAILER_TAG)] != TRAILER_TAG:
        raise ModelFileError(
            "Model file is truncated or corrupted (missing trailer)",
            "MODEL_CHECKSUM_MISMATCH",
        )
    signed = data[: tag_at + len(TRAILER_TAG)]
    if hashlib.sha256(signed).digest() != data[-_DIGEST_SIZE:]:
        raise ModelFileError("Model file checksum mismatch", "MODEL_CHECKSUM_MISMATCH")


def _parse_sections(data: bytes) -> Dict[str, bytes]:
    sections: Dict[str, bytes] = {}
    offset = _HEADER.size
    end = len(data) - _TRAILER_SIZE
    while offset < end:
        if offset + _SECTION.size > end:
            raise ModelFileError("Section header overruns file", "MODEL_FORMAT_ERROR")
        tag, length = _SECTION.unpack_from(data, offset)
        offset += _SECTION.size
        if offset + length + _DIGEST_SIZE > end:
            raise ModelFileError(
                f"Section {tag!r} overruns file", "MODEL_FORMAT_ERROR"
            )
        payload = data[offset : offset + length]
        offset += length
        if hashlib.sha256(payload).digest() != data[offset : offset + _DIGEST_SIZE]:
            raise ModelFileError(
                f"Checksum mismatch in section {tag.decode('ascii', 'replace')}",
                "MODEL_CHECKSUM_MISMATCH",
            )
        offset += _DIGEST_SIZE
        sections[tag.decode("ascii")] = payload
    return sections


def _array(
    sections: Dict[str, bytes], tag: str, dtype: np.dtype, shape: Tuple[int, ...]
) -> np.ndarray:
    if tag not in sections:
        raise ModelFileError(f"Model file lacks section {tag}", "MODEL_FORMAT_ERROR")
    payload = sections[tag]
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(payload) != expected:
        raise ModelFileError(
            f"Section {tag} holds {len(payload)} bytes, expected {expected}",
            "MODEL_FORMAT_ERROR",
        )
    values = np.frombuffer(payload, dtype=dtype).reshape(shape)
    return values.astype(dtype.newbyteorder("="))


def _nn_index(payload: bytes, n_points: int, rank: int, leaf_size: int) -> NnIndex:
    head = struct.calcsize("<QQ")
    if len(payload) < head:
        raise ModelFileError("Nearest-neighbor section is empty", "MODEL_FORMAT_ERROR")
    n_nodes, width = struct.unpack_from("<QQ", payload)
    if width != 2 * rank:
        raise ModelFileError(
            f"Nearest-neighbor points have width {width}, expected {2 * rank}",
            "MODEL_FORMAT_ERROR",
        )

    layout = [("points", _F8, (n_points, width)), ("split_value", _F8, (n_nodes,))]
    for key in _NN_INT_ARRAYS:
        layout.append((key, _I8, (n_points,) if key == "order" else (n_nodes,)))

    arrays: Dict[str, np.ndarray] = {}
    offset = head
    for key, dtype, shape in layout:
        count = int(np.prod(shape))
        if offset + count * dtype.itemsize > len(payload):
            raise ModelFileError(
                "Nearest-neighbor section is truncated", "MODEL_FORMAT_ERROR"
            )
        values = np.frombuffer(payload, dtype=dtype, count=count, offset=offset)
        native = np.float64 if dtype.kind == "f" else np.intp
        arrays[key] = values.reshape(shape).astype(native)
        offset += count * dtype.itemsize
    return NnIndex.from_arrays(arrays, leaf_size=leaf_size)


def load_model(path: Union[str, Path]) -> SvdPhatModel:
    """
    Read a model file written by save_model.

    Raises:
        ModelFileError: On I/O failure, unknown format, version mismatch,
            checksum mismatch (including truncation) or inconsistent geometry
    """
    data = _read_bytes(path)
    header = _parse_header(data)
    _verify_trailer(data)
    sections = _parse_sections(data)

    try:
        meta = json.loads(sections.get("META", b"{}").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFileError(f"Invalid model metadata: {e}", "MODEL_FORMAT_ERROR")

    n_mics = header["n_mics"]
    n_points = header["n_points"]
    rank = header["rank"]

    mics = _array(sections, "MICS", _F8, (n_mics, 3))
    try:
        config = ArrayConfig(
            label=meta.get("label"),
            mics=tuple(tuple(float(c) for c in m) for m in mics),
            sample_rate=header["sample_rate"],
            speed_of_sound=header["speed_of_sound"],
            frame_size=header["frame_size"],
            hop_size=header["hop_size"],
        )
    except ValueError as e:
        raise ModelFileError(
            f"Invalid array config in model: {e}", "MODEL_FORMAT_ERROR"
        )

    grid = ScanGrid(
        points=_array(sections, "GRID", _F8, (n_points, 3)),
        level=meta.get("grid_level"),
    )
    if geometry_digest(config, grid) != header["digest"]:
        raise ModelFileError(
            "Stored geometry does not match its hash", "MODEL_GEOMETRY_MISMATCH"
        )

    n_columns = config.n_columns
    sval = sections.get("SVAL", b"")
    n_sval = len(sval) // _F8.itemsize - 1
    if n_sval < rank:
        raise ModelFileError(
            f"Model stores {n_sval} singular values for rank {rank}",
            "MODEL_FORMAT_ERROR",
        )
    energies = _array(sections, "SVAL", _F8, (n_sval + 1,))

    steering = None
    if header["flags"] & FLAG_STEERING:
        steering = SteeringMatrix(
            coefficients=_array(sections, "STEE", _C16, (n_points, n_columns)),
            grid=grid,
            n_pairs=config.n_pairs,
            n_bins=config.n_bins,
            config=config,
        )

    if "NNIX" not in sections:
        raise ModelFileError("Model file lacks section NNIX", "MODEL_FORMAT_ERROR")

    return SvdPhatModel(
        projection=_array(sections, "BASE", _C16, (rank, n_columns)),
        dictionary=_array(sections, "DICT", _C16, (n_points, rank)),
        row_norms=_array(sections, "NORM", _F8, (n_points,)),
        rank=rank,
        delta=header["delta"],
        singular_values=energies[1:].copy(),
        total_energy=float(energies[0]),
        nn_index=_nn_index(
            sections["NNIX"], n_points, rank, header["leaf_size"]
        ),
        grid=grid,
        steering=steering,
        config=config,
    )


def inspect_model(path: Union[str, Path]) -> Dict[str, Any]:
    """Summary of a model file: header fields plus fit diagnostics."""
    model = load_model(path)
    config = model.config
    assert config is not None
    return {
        "label": config.label,
        "n_mics": config.n_mics,
        "frame_size": config.frame_size,
        "hop_size": config.hop_size,
        "sample_rate": config.sample_rate,
        "speed_of_sound": config.speed_of_sound,
        "grid_level": model.grid.level,
        "n_points": model.n_points,
        "n_columns": model.n_columns,
        "rank": model.rank,
        "delta": model.delta,
        "gain": model.gain,
        "norm_ratio": model.norm_ratio,
        "retained_energy": model.retained_energy,
        "reconstruction_error": model.reconstruction_error,
        "stores_steering": model.steering is not None,
        "leaf_size": model.nn_index.leaf_size,
        "tree_depth": model.nn_index.depth(),
        "file_bytes": Path(path).expanduser().stat().st_size,
    }
