"""
Array geometry, spherical scan grids and time differences of arrival.

TDOAs are expressed in samples. Microphone pairs are always enumerated in
lexicographic order (0,1), (0,2), ..., (M-2,M-1); every matrix layout in the
package depends on that order.
"""

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError as PydanticValidationError

from .config import shipped_config_dir
from .exceptions import GeometryError
from .models import ArrayConfig
from .validation import (
    MAX_GRID_LEVEL,
    UNIT_TOLERANCE,
    ValidationError,
    validate_file_path,
    validate_geometry_label,
    validate_grid_level,
    validate_unit_vector,
)

DEFAULT_GRID_LEVEL = 4

_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1, _PHI, 0],
        [1, _PHI, 0],
        [-1, -_PHI, 0],
        [1, -_PHI, 0],
        [0, -1, _PHI],
        [0, 1, _PHI],
        [0, -1, -_PHI],
        [0, 1, -_PHI],
        [_PHI, 0, -1],
        [_PHI, 0, 1],
        [-_PHI, 0, -1],
        [-_PHI, 0, 1],
    ],
    dtype=np.float64,
)

_ICOSAHEDRON_FACES = [
    (0, 11, 5),
    (0, 5, 1),
    (0, 1, 7),
    (0, 7, 10),
    (0, 10, 11),
    (1, 5, 9),
    (5, 11, 4),
    (11, 10, 2),
    (10, 7, 6),
    (7, 1, 8),
    (3, 9, 4),
    (3, 4, 2),
    (3, 2, 6),
    (3, 6, 8),
    (3, 8, 9),
    (4, 9, 5),
    (2, 4, 11),
    (6, 2, 10),
    (8, 6, 7),
    (9, 8, 1),
]


class MicPair(NamedTuple):
    """Ordered microphone pair with i < j (0-based)."""

    i: int
    j: int


def mic_pairs(n_mics: int) -> List[MicPair]:
    """All P = M(M-1)/2 pairs in lexicographic order."""
    return [MicPair(i, j) for i, j in combinations(range(n_mics), 2)]


def pair_baselines(config: ArrayConfig) -> np.ndarray:
    """Baseline vectors r_j - r_i for every pair, shape (P, 3)."""
    positions = config.positions
    pairs = np.array(mic_pairs(config.n_mics), dtype=np.intp)
    return positions[pairs[:, 1]] - positions[pairs[:, 0]]


@dataclass(frozen=True, eq=False)
class ScanGrid:
    """Q unit-norm candidate directions."""

    points: np.ndarray
    level: Optional[int] = None

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise GeometryError(
                f"Grid points must have shape (Q, 3), got {points.shape}",
                "INVALID_GRID",
            )
        if points.shape[0] < 1:
            raise GeometryError("Grid must contain at least one point", "INVALID_GRID")

        norms = np.linalg.norm(points, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
            raise GeometryError("Grid points must have unit norm", "INVALID_GRID")

        if np.unique(points, axis=0).shape[0] != points.shape[0]:
            raise GeometryError("Grid points must be distinct", "INVALID_GRID")

        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.size

    def direction(self, index: int) -> Tuple[float, float, float]:
        x, y, z = self.points[index]
        return float(x), float(y), float(z)


def grid_size(level: int) -> int:
    """Vertex count of an icosahedron subdivided ``level`` times."""
    return 10 * 4**level + 2


def build_grid(levels: int = DEFAULT_GRID_LEVEL) -> ScanGrid:
    """
    Build a near-uniform spherical grid by recursive icosahedron subdivision.

    Each subdivision splits every triangle into four at its edge midpoints and
    projects the new vertices onto the unit sphere. Midpoints are keyed by
    their edge, so shared edges produce a single vertex. Level 4 yields 2562
    points.

    Args:
        levels: Number of subdivisions

    Returns:
        ScanGrid with 10 * 4**levels + 2 points

    Raises:
        ValidationError: If levels is negative
        GeometryError: If levels exceeds the supported maximum
    """
    levels = validate_grid_level(levels)
    if levels > MAX_GRID_LEVEL:
        raise GeometryError(
            f"Grid level {levels} would create {grid_size(levels)} points "
            f"(maximum level is {MAX_GRID_LEVEL})",
            "GRID_TOO_LARGE",
        )

    base = _ICOSAHEDRON_VERTICES / np.linalg.norm(
        _ICOSAHEDRON_VERTICES, axis=1, keepdims=True
    )
    vertices: List[np.ndarray] = list(base)
    faces = list(_ICOSAHEDRON_FACES)

    for _ in range(levels):
        midpoints: Dict[Tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoints:
                p = vertices[a] + vertices[b]
                vertices.append(p / np.linalg.norm(p))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        subdivided = []
        for a, b, c in faces:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            subdivided.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        faces = subdivided

    return ScanGrid(points=np.vstack(vertices), level=levels)


def angular_spacing(grid: ScanGrid) -> np.ndarray:
    """Angle in radians from each grid point to its nearest neighbor."""
    cosines = grid.points @ grid.points.T
    np.fill_diagonal(cosines, -np.inf)
    return np.arccos(np.clip(cosines.max(axis=1), -1.0, 1.0))


def _check_pair(config: ArrayConfig, pair: MicPair) -> None:
    i, j = pair
    if not 0 <= i < j < config.n_mics:
        raise ValidationError(
            f"Invalid microphone pair {tuple(pair)} for {config.n_mics} mics",
            "INVALID_PAIR",
        )


def tdoa_exact(
    config: ArrayConfig, source: Sequence[float], pair: MicPair
) -> float:
    """
    TDOA in samples for a source at a finite position.

    Returns (f_S/c)(||s - r_i|| - ||s - r_j||).
    """
    _check_pair(config, pair)
    s = np.asarray(source, dtype=np.float64)
    if s.shape != (3,) or not np.all(np.isfinite(s)):
        raise ValidationError("source must be a finite 3-vector", "INVALID_VECTOR")

    positions = config.positions
    d_i = np.linalg.norm(s - positions[pair.i])
    d_j = np.linalg.norm(s - positions[pair.j])
    return float(config.samples_per_meter * (d_i - d_j))


def tdoa_farfield(
    config: ArrayConfig, direction: Sequence[float], pair: MicPair
) -> float:
    """
    TDOA in samples under the farfield assumption.

    Returns (f_S/c)(r_j - r_i) . u for a unit direction u.

    Raises:
        ValidationError: If the direction is not unit norm
    """
    _check_pair(config, pair)
    u = validate_unit_vector(direction)
    positions = config.positions
    baseline = positions[pair.j] - positions[pair.i]
    return float(config.samples_per_meter * np.dot(baseline, u))


def farfield_tdoa_matrix(config: ArrayConfig, directions: np.ndarray) -> np.ndarray:
    """Farfield TDOAs for many unit directions, shape (Q, P)."""
    baselines = pair_baselines(config)
    return config.samples_per_meter * (np.asarray(directions) @ baselines.T)


def exact_tdoa_matrix(config: ArrayConfig, sources: np.ndarray) -> np.ndarray:
    """Exact TDOAs for many source positions, shape (S, P)."""
    positions = config.positions
    distances = np.linalg.norm(
        np.asarray(sources, dtype=np.float64)[:, None, :] - positions[None, :, :],
        axis=-1,
    )
    pairs = np.array(mic_pairs(config.n_mics), dtype=np.intp)
    differences = distances[:, pairs[:, 0]] - distances[:, pairs[:, 1]]
    return config.samples_per_meter * differences


def load_array_config(path: Union[str, Path]) -> ArrayConfig:
    """
    Load an array configuration from a YAML file.

    The file lists ``mics`` as xyz positions in meters together with
    ``sample_rate``, ``speed_of_sound``, ``frame_size`` and ``hop_size``.

    Raises:
        ValidationError: If the file does not exist
        GeometryError: If the file cannot be parsed or fails validation
    """
    resolved = validate_file_path(path, "Array config")

    try:
        with open(resolved, "r") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise GeometryError(
            f"Could not read array config {resolved}: {e}", "ARRAY_CONFIG_INVALID"
        )

    if not isinstance(data, dict):
        raise GeometryError(
            f"Array config {resolved} must be a mapping", "ARRAY_CONFIG_INVALID"
        )

    data.setdefault("label", resolved.stem)

    try:
        return ArrayConfig.model_validate(data)
    except PydanticValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in e.errors()
        )
        raise GeometryError(
            f"Invalid array config {resolved}: {details}", "ARRAY_CONFIG_INVALID"
        )


def available_geometries(config_dir: Optional[Path] = None) -> Dict[str, Path]:
    """Map geometry labels to config files found in a directory."""
    directory = config_dir if config_dir is not None else shipped_config_dir()
    found: Dict[str, Path] = {}
    for path in sorted(directory.glob("*.yaml")):
        try:
            with open(path, "r") as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError):
            continue
        label = data.get("label") if isinstance(data, dict) else None
        found[str(label or path.stem).lower()] = path
    return found


def resolve_array_config(
    name_or_path: Union[str, Path], config_dir: Optional[Path] = None
) -> ArrayConfig:
    """
    Load an array config given either a file path or a geometry label.

    Raises:
        ValidationError: If a label is unknown (the message lists the choices)
            or a path does not exist
    """
    candidate = Path(name_or_path).expanduser()
    looks_like_path = candidate.suffix in (".yaml", ".yml") or len(candidate.parts) > 1
    if candidate.is_file() or looks_like_path:
        return load_array_config(candidate)

    geometries = available_geometries(config_dir)
    label = validate_geometry_label(str(name_or_path), geometries.keys())
    return load_array_config(geometries[label])
