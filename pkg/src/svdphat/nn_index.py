"""
Exact k-d tree over complex vectors.

Complex K-vectors are embedded in R^2K as [real parts, imaginary parts],
which preserves Euclidean distances. Nodes split at the median of the
coordinate with the largest spread; leaves hold at most ``leaf_size`` points
and are scanned exhaustively. Ties between equally distant points resolve to
the lowest original index, matching a linear scan.
"""

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Tuple

import numpy as np

from .exceptions import NnIndexError

DEFAULT_LEAF_SIZE = 16
LEAF = -1


class NearestResult(NamedTuple):
    """Search result with traversal statistics."""

    index: int
    distance: float
    visited_nodes: int
    visited_leaves: int
    scanned_points: int


def embed(vectors: np.ndarray) -> np.ndarray:
    """Isometric real embedding of complex vectors (last axis K -> 2K)."""
    vectors = np.asarray(vectors, dtype=np.complex128)
    return np.ascontiguousarray(
        np.concatenate([vectors.real, vectors.imag], axis=-1), dtype=np.float64
    )


def squared_distances(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row-wise squared distances; shared by the tree and the linear scan."""
    diff = points - query
    return np.sum(diff * diff, axis=1)


def brute_force_nearest(points: np.ndarray, query: np.ndarray) -> Tuple[int, float]:
    """Linear scan over complex points; lowest index wins ties."""
    distances = squared_distances(embed(points), embed(query))
    index = int(np.argmin(distances))
    return index, float(distances[index])


@dataclass(frozen=True, eq=False)
class NnIndex:
    """Immutable k-d tree; node arrays are indexed by node id, root is 0."""

    points: np.ndarray
    order: np.ndarray
    split_dim: np.ndarray
    split_value: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    stop: np.ndarray
    leaf_size: int

    def __post_init__(self) -> None:
        for name in (
            "points",
            "order",
            "split_dim",
            "split_value",
            "left",
            "right",
            "start",
            "stop",
        ):
            getattr(self, name).setflags(write=False)

    @classmethod
    def build(cls, points: np.ndarray, leaf_size: int = DEFAULT_LEAF_SIZE) -> "NnIndex":
        """
        Build a balanced tree over Q complex K-vectors.

        Args:
            points: Complex array of shape (Q, K)
            leaf_size: Maximum number of points per leaf

        Raises:
            NnIndexError: If the input is empty or not a 2-D array
        """
        points = np.asarray(points)
        if points.ndim != 2:
            raise NnIndexError(
                f"Points must have shape (Q, K), got {points.shape}",
                "DIMENSION_MISMATCH",
            )
        if points.shape[0] == 0 or points.shape[1] == 0:
            raise NnIndexError("Cannot build an index over no points", "EMPTY_INDEX")
        if leaf_size < 1:
            raise NnIndexError(f"leaf_size must be at least 1, got {leaf_size}")

        data = embed(points)
        perm = np.arange(data.shape[0], dtype=np.intp)
        keys = ("split_dim", "split_value", "left", "right", "start", "stop")
        nodes: Dict[str, List[float]] = {key: [] for key in keys}

        def new_node(lo: int, hi: int) -> int:
            for key, value in (
                ("split_dim", LEAF),
                ("split_value", 0.0),
                ("left", LEAF),
                ("right", LEAF),
                ("start", lo),
                ("stop", hi),
            ):
                nodes[key].append(value)
            return len(nodes["start"]) - 1

        def grow(lo: int, hi: int) -> int:
            node = new_node(lo, hi)
            if hi - lo <= leaf_size:
                return node

            block = data[perm[lo:hi]]
            spread = block.max(axis=0) - block.min(axis=0)
            dim = int(np.argmax(spread))
            if spread[dim] == 0.0:
                return node

            perm[lo:hi] = perm[lo:hi][np.argsort(block[:, dim], kind="stable")]
            mid = lo + (hi - lo) // 2
            nodes["split_dim"][node] = dim
            nodes["split_value"][node] = float(data[perm[mid], dim])
            nodes["left"][node] = grow(lo, mid)
            nodes["right"][node] = grow(mid, hi)
            return node

        grow(0, data.shape[0])

        return cls(
            points=np.ascontiguousarray(data[perm]),
            order=perm,
            split_dim=np.asarray(nodes["split_dim"], dtype=np.intp),
            split_value=np.asarray(nodes["split_value"], dtype=np.float64),
            left=np.asarray(nodes["left"], dtype=np.intp),
            right=np.asarray(nodes["right"], dtype=np.intp),
            start=np.asarray(nodes["start"], dtype=np.intp),
            stop=np.asarray(nodes["stop"], dtype=np.intp),
            leaf_size=int(leaf_size),
        )

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def dimension(self) -> int:
        """Complex dimension K of the indexed vectors."""
        return int(self.points.shape[1] // 2)

    @property
    def n_nodes(self) -> int:
        return int(self.split_dim.size)

    def depth(self) -> int:
        """Number of levels from the root to the deepest leaf."""

        def walk(node: int) -> int:
            if self.split_dim[node] == LEAF:
                return 1
            return 1 + max(walk(int(self.left[node])), walk(int(self.right[node])))

        return walk(0)

    def search(self, query: np.ndarray) -> NearestResult:
        """
        Exact nearest neighbor of a complex K-vector, with traversal counts.

        Raises:
            NnIndexError: If the query dimension differs from the index
        """
        q = embed(np.asarray(query).reshape(-1))
        if q.size != self.points.shape[1]:
            raise NnIndexError(
                f"Query has dimension {q.size // 2}, index holds {self.dimension}",
                "DIMENSION_MISMATCH",
            )

        best_distance = np.inf
        best_index = self.size
        visited_nodes = visited_leaves = scanned = 0
        stack = [0]

        # Entries are (node, lower bound); far children are pushed below near ones.
        bounds = [0.0]
        while stack:
            node = stack.pop()
            bound = bounds.pop()
            if bound > best_distance:
                continue
            visited_nodes += 1

            dim = self.split_dim[node]
            if dim == LEAF:
                lo, hi = self.start[node], self.stop[node]
                distances = squared_distances(self.points[lo:hi], q)
                visited_leaves += 1
                scanned += hi - lo
                closest = distances.min()
                if closest <= best_distance:
                    candidate = int(self.order[lo:hi][distances == closest].min())
                    if closest < best_distance or candidate < best_index:
                        best_distance = float(closest)
                        best_index = candidate
                continue

            diff = q[dim] - self.split_value[node]
            near, far = (
                (self.left[node], self.right[node])
                if diff < 0
                else (self.right[node], self.left[node])
            )
            stack.append(int(far))
            bounds.append(float(diff * diff))
            stack.append(int(near))
            bounds.append(0.0)

        return NearestResult(
            index=best_index,
            distance=best_distance,
            visited_nodes=visited_nodes,
            visited_leaves=visited_leaves,
            scanned_points=scanned,
        )

    def nearest(self, query: np.ndarray) -> Tuple[int, float]:
        """Return (index, squared distance) of the closest stored point."""
        result = self.search(query)
        return result.index, result.distance

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "points": self.points,
            "order": self.order,
            "split_dim": self.split_dim,
            "split_value": self.split_value,
            "left": self.left,
            "right": self.right,
            "start": self.start,
            "stop": self.stop,
        }

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray], leaf_size: int) -> "NnIndex":
        """Rebuild an index from the arrays produced by to_arrays."""
        n_nodes = arrays["split_dim"].size
        for key in ("split_value", "left", "right", "start", "stop"):
            if arrays[key].size != n_nodes:
                raise NnIndexError(
                    f"Node array '{key}' has {arrays[key].size} entries, "
                    f"expected {n_nodes}",
                    "CORRUPT_INDEX",
                )
        if arrays["order"].size != arrays["points"].shape[0]:
            raise NnIndexError(
                "Point order does not match point count", "CORRUPT_INDEX"
            )
        return cls(leaf_size=leaf_size, **arrays)
