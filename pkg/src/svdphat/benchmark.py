"""
Delta sweep comparing SVD-PHAT with exhaustive SRP-PHAT.

For every geometry the steering matrix is built and decomposed once, one
model is fitted per delta, and every model is run on the same simulated
scenes as the exact search. Scenes are processed by a bounded thread pool
and gathered in submission order, so results do not depend on scheduling.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .evaluation import agreement_rate, array_dimensionality, rmse
from .geometry import ScanGrid, build_grid
from .models import ArrayConfig, BenchmarkMetadata, BenchmarkRow, SignalKind
from .reporting import debug, log, measure_time_ms
from .simulation import random_scene, simulate_scene
from .spectral import cross_spectra, stft
from .srp import SteeringMatrix, build_steering_matrix, srp_localize_frames
from .svd_model import SvdPhatModel, decompose
from .validation import validate_delta, validate_positive_int


@dataclass
class SceneOutcome:
    """Per-scene measurements for one geometry."""

    n_frames: int
    rmse_srp: float
    srp_seconds: float
    rmse_svd: List[float] = field(default_factory=list)
    svd_seconds: List[float] = field(default_factory=list)
    agreement: List[float] = field(default_factory=list)
    visited_leaves: List[float] = field(default_factory=list)


@dataclass
class BenchmarkReport:
    """Rows of the sweep plus the statistics shown next to them."""

    rows: List[BenchmarkRow]
    metadata: BenchmarkMetadata
    visited_leaves: List[float]
    agreement: List[float]


def scene_seeds(seed: int, scenes: int) -> List[int]:
    """Independent per-scene seeds derived from one base seed."""
    state = np.random.SeedSequence(seed).generate_state(scenes, dtype=np.uint32)
    return [int(s) for s in state]


def _mean_visited_leaves(model: SvdPhatModel, frames: np.ndarray) -> float:
    z = frames @ model.projection.T
    norms = np.linalg.norm(z, axis=1)
    counts = [
        model.nn_index.search(np.conj(z[i] / norms[i])).visited_leaves
        for i in range(z.shape[0])
        if norms[i] > 0.0
    ]
    return float(np.mean(counts)) if counts else 0.0


def evaluate_scene(
    config: ArrayConfig,
    W: SteeringMatrix,
    models: Sequence[SvdPhatModel],
    seed: int,
    n_samples: int,
    snr_range: Tuple[float, float],
    kind: SignalKind,
) -> SceneOutcome:
    """Simulate one scene and score the exact search and every model on it."""
    scene = random_scene(config, seed, n_samples, snr_range, kind)
    frames = cross_spectra(stft(simulate_scene(scene), config))
    alpha = array_dimensionality(config)

    start = time.perf_counter()
    exact = srp_localize_frames(W, frames)
    outcome = SceneOutcome(
        n_frames=len(exact),
        rmse_srp=rmse(exact, scene.direction, alpha),
        srp_seconds=time.perf_counter() - start,
    )

    for model in models:
        start = time.perf_counter()
        estimates = model.localize_frames(frames)
        outcome.svd_seconds.append(time.perf_counter() - start)
        outcome.rmse_svd.append(rmse(estimates, scene.direction, alpha))
        outcome.agreement.append(agreement_rate(estimates, exact))
        outcome.visited_leaves.append(_mean_visited_leaves(model, frames))

    return outcome


def _fps(frames: int, seconds: float, timing: bool) -> float:
    if not timing or seconds <= 0.0:
        return 0.0
    return frames / seconds


def benchmark_sweep(
    configs: Sequence[ArrayConfig],
    deltas: Sequence[float],
    scenes: int = 50,
    seed: int = 0,
    grid_level: int = 4,
    signal_seconds: float = 0.5,
    snr_range: Tuple[float, float] = (0.0, 30.0),
    signal_kind: SignalKind = SignalKind.NOISE,
    threads: int = 1,
    timing: bool = True,
    leaf_size: int = 16,
    max_steering_bytes: Optional[int] = None,
    grid: Optional[ScanGrid] = None,
) -> BenchmarkReport:
    """
    Run the delta sweep over several geometries.

    Args:
        configs: Array configurations, one row group per geometry
        deltas: Reconstruction tolerances, one row per geometry and delta
        scenes: Simulated scenes per geometry
        seed: Base seed; identical seeds give identical rows apart from fps
        grid_level: Scan grid subdivision level
        signal_seconds: Duration of each scene
        snr_range: SNR draw range in dB
        signal_kind: Source signal family
        threads: Worker threads evaluating scenes
        timing: Measure frames per second; when False fps columns are 0.0
        leaf_size: k-d tree leaf size
        max_steering_bytes: Memory cap for each steering matrix
        grid: Prebuilt grid, overriding grid_level

    Returns:
        BenchmarkReport with rows ordered by geometry then delta
    """
    deltas = [validate_delta(d) for d in deltas]
    scenes = validate_positive_int(scenes, "scenes")
    threads = validate_positive_int(threads, "threads")
    grid = grid if grid is not None else build_grid(grid_level)
    seeds = scene_seeds(seed, scenes)

    rows: List[BenchmarkRow] = []
    visited: List[float] = []
    agreement: List[float] = []
    labels: List[str] = []

    for number, config in enumerate(configs):
        label = config.label or f"array{number}"
        labels.append(label)
        n_samples = max(int(round(signal_seconds * config.sample_rate)), 1)

        start = time.perf_counter()
        W = build_steering_matrix(config, grid, max_bytes=max_steering_bytes)
        decomposition = decompose(W)
        models = [
            SvdPhatModel.fit(W, d, decomposition=decomposition, leaf_size=leaf_size)
            for d in deltas
        ]
        log(
            f"📐 {label}: W {W.n_points} x {W.n_columns}, "
            f"K = {', '.join(str(m.rank) for m in models)} "
            f"({measure_time_ms(start):.0f} ms)"
        )

        evaluate = partial(
            evaluate_scene,
            config,
            W,
            models,
            n_samples=n_samples,
            snr_range=snr_range,
            kind=signal_kind,
        )
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(evaluate, seeds))

        total_frames = sum(o.n_frames for o in outcomes)
        srp_seconds = sum(o.srp_seconds for o in outcomes)
        rmse_srp = float(np.mean([o.rmse_srp for o in outcomes]))
        debug(f"{label}: {total_frames} frames over {scenes} scenes")

        for i, model in enumerate(models):
            svd_seconds = sum(o.svd_seconds[i] for o in outcomes)
            row = BenchmarkRow.build(
                geometry=label,
                delta=model.delta,
                rank=model.rank,
                n_points=model.n_points,
                rmse_svd=float(np.mean([o.rmse_svd[i] for o in outcomes])),
                rmse_srp=rmse_srp,
                fps_svd=_fps(total_frames, svd_seconds, timing),
                fps_srp=_fps(total_frames, srp_seconds, timing),
            )
            rows.append(row)
            agreement.append(float(np.mean([o.agreement[i] for o in outcomes])))
            visited.append(float(np.mean([o.visited_leaves[i] for o in outcomes])))

    metadata = BenchmarkMetadata(
        scenes=scenes,
        seed=seed,
        grid_level=grid.level if grid.level is not None else grid_level,
        n_points=grid.size,
        signal_seconds=signal_seconds,
        snr_range_db=snr_range,
        timing=timing,
        geometries=labels,
        deltas=list(deltas),
    )
    return BenchmarkReport(
        rows=rows, metadata=metadata, visited_leaves=visited, agreement=agreement
    )


def run_benchmark(
    configs: Sequence[ArrayConfig],
    deltas: Sequence[float],
    scenes: int = 50,
    seed: int = 0,
    **options: Any,
) -> List[BenchmarkRow]:
    """Rows of benchmark_sweep; see it for the accepted options."""
    report = benchmark_sweep(configs, deltas, scenes=scenes, seed=seed, **options)
    return report.rows
