"""
Command-line interface: ``doa build-model|localize|simulate|benchmark``.

Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.
"""

import functools
import json
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import IO, Any, Callable, Iterator, List, Optional, TypeVar, cast

import click
from pydantic import ValidationError as PydanticValidationError

from . import __version__
from .audio import SUPPORTED_SUBTYPES, check_wav_matches, read_wav, write_wav
from .benchmark import benchmark_sweep
from .config import Config
from .exceptions import SvdPhatError
from .geometry import build_grid, resolve_array_config
from .model_io import inspect_model, load_model, save_model
from .models import ArrayConfig, DoaEstimate, RunConfig, SignalKind
from .reporting import (
    create_error_response,
    error,
    get_console,
    get_error_code_for_exception,
    log,
    measure_time_ms,
    render_benchmark_table,
    set_log_level,
    write_benchmark_csv,
    write_estimates,
)
from .simulation import random_scene, simulate_scene
from .spectral import cross_spectra, stft
from .srp import build_steering_matrix, srp_localize_frames
from .svd_model import SvdPhatModel
from .validation import (
    ValidationError,
    parse_deltas,
    validate_delta,
    validate_grid_level,
    validate_output_path,
    validate_unit_vector,
)

F = TypeVar("F", bound=Callable[..., Any])

DEFAULT_GEOMETRIES = "1d,2d,3d"
DEFAULT_DELTAS = "1e-1..1e-6"


def handle_errors(operation: str) -> Callable[[F], F]:
    """Map package exceptions onto exit codes and error lines."""

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except ValidationError as e:
                raise click.UsageError(f"{e.message} [{e.error_code}]")
            except (SvdPhatError, OSError) as e:
                code = get_error_code_for_exception(e)
                message = getattr(e, "message", None) or str(e)
                error(f"{operation} failed: {message} [{code}]")
                if kwargs.get("json_output"):
                    click.echo(create_error_response(code, message, operation))
                sys.exit(1)

        return cast(F, wrapper)

    return decorator


def _config(ctx: click.Context) -> Config:
    return cast(Config, ctx.obj)


def _run_config(**fields: Any) -> RunConfig:
    try:
        return RunConfig(**fields)
    except PydanticValidationError as e:
        details = "; ".join(err["msg"] for err in e.errors())
        raise ValidationError(details, "INVALID_ARGUMENTS")


def _open_output(path: Optional[Path]) -> IO[str]:
    if path is None:
        return click.get_text_stream("stdout")
    return open(path, "w", newline="")


def _array(ctx: click.Context, name: str) -> ArrayConfig:
    return resolve_array_config(name, _config(ctx).array_dir)


def _parse_direction(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ValidationError(
            f"Direction must be three comma separated numbers, got '{text}'",
            "INVALID_VECTOR",
        )
    norm = sum(v * v for v in values) ** 0.5
    if len(values) != 3 or norm == 0.0:
        raise ValidationError(
            f"Direction must be a nonzero 3-vector, got '{text}'", "INVALID_VECTOR"
        )
    return [v / norm for v in values]


@click.group()
@click.option(
    "--threads", type=int, default=None, help="Worker thread cap (default 1)."
)
@click.option("--quiet", is_flag=True, help="Only print errors on stderr.")
@click.version_option(__version__, prog_name="doa")
@click.pass_context
def cli(ctx: click.Context, threads: Optional[int], quiet: bool) -> None:
    """Sound source localization with SRP-PHAT and SVD-PHAT."""
    try:
        config = Config.from_env()
        if threads is not None:
            config.threads = threads
            config._validate()
    except ValueError as e:
        raise click.UsageError(f"Configuration error: {e}")

    if quiet:
        config.log_level = "quiet"
    set_log_level(config.log_level)
    ctx.obj = config


@cli.command("build-model")
@click.option("--array", "array_name", required=True, help="Geometry label or YAML.")
@click.option("--grid-level", type=int, default=None, help="Grid subdivisions.")
@click.option("--delta", type=float, default=None, help="Tolerance in (0, 1).")
@click.option(
    "--output",
    "-o",
    "output_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Model file to write.",
)
@click.option("--no-steering", is_flag=True, help="Do not store W in the model.")
@click.pass_context
@handle_errors("build-model")
def build_model(
    ctx: click.Context,
    array_name: str,
    grid_level: Optional[int],
    delta: Optional[float],
    output_path: Path,
    no_steering: bool,
) -> None:
    """Build the steering matrix, fit SVD-PHAT and save the model."""
    config = _config(ctx)
    delta = validate_delta(config.delta if delta is None else delta)
    level = validate_grid_level(config.grid_level if grid_level is None else grid_level)
    run = _run_config(grid_level=level, delta=delta, output_path=output_path)
    array = _array(ctx, array_name)

    start = time.perf_counter()
    grid = build_grid(run.grid_level)
    W = build_steering_matrix(array, grid, max_bytes=config.max_steering_bytes)
    log(f"🔄 Fitting {array.label}: W is {W.n_points} x {W.n_columns}")
    model = SvdPhatModel.fit(
        W,
        run.delta,
        leaf_size=config.leaf_size,
        store_steering=config.store_steering and not no_steering,
    )
    fit_ms = measure_time_ms(start)

    assert run.output_path is not None
    save_model(model, run.output_path)
    log(f"✅ Model saved to {run.output_path}")
    click.echo(
        f"K={model.rank} gain={model.gain:.2f} norm_ratio={model.norm_ratio:.6f} "
        f"fit_ms={fit_ms:.1f}"
    )


@cli.command()
@click.option(
    "--model",
    "model_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Model file from build-model.",
)
@click.option(
    "--input",
    "-i",
    "input_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Multichannel WAV recording.",
)
@click.option(
    "--output",
    "-o",
    "output_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Output file (default stdout).",
)
@click.option("--json", "json_output", is_flag=True, help="Emit JSON lines.")
@click.option("--exact", is_flag=True, help="Use exhaustive SRP-PHAT.")
@click.option(
    "--min-energy",
    type=float,
    default=None,
    help="Mark frames whose energy is below this value as invalid.",
)
@click.pass_context
@handle_errors("localize")
def localize(
    ctx: click.Context,
    model_path: Path,
    input_path: Path,
    output_path: Optional[Path],
    json_output: bool,
    exact: bool,
    min_energy: Optional[float],
) -> None:
    """Estimate the direction of arrival of every frame of a recording."""
    config = _config(ctx)
    run = _run_config(
        model_path=model_path,
        input_path=input_path,
        output_path=output_path,
        json_output=json_output,
    )

    assert run.model_path is not None and run.input_path is not None
    model = load_model(run.model_path)
    assert model.config is not None
    signals, sample_rate = read_wav(run.input_path)
    check_wav_matches(signals, sample_rate, model.config)

    start = time.perf_counter()
    frames = cross_spectra(stft(signals, model.config))
    estimates: List[DoaEstimate]
    if exact:
        W = model.steering or build_steering_matrix(
            model.config, model.grid, max_bytes=config.max_steering_bytes
        )
        estimates = srp_localize_frames(W, frames)
    else:
        estimates = model.localize_frames(frames)

    if min_energy is not None:
        estimates = [
            e.model_copy(update={"valid": False})
            if e.valid and e.energy < min_energy
            else e
            for e in estimates
        ]

    stream = _open_output(run.output_path)
    try:
        count = write_estimates(estimates, stream, json_lines=run.json_output)
    finally:
        if run.output_path is not None:
            stream.close()

    method = "srp" if exact else "svd"
    log(f"✅ Localized {count} frames ({method}) in {measure_time_ms(start):.0f} ms")


@cli.command()
@click.option("--array", "array_name", required=True, help="Geometry label or YAML.")
@click.option(
    "--output",
    "-o",
    "output_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="WAV file to write; ground truth goes next to it as .json.",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seconds", type=float, default=None, help="Duration in seconds.")
@click.option("--snr", type=float, default=None, help="SNR in dB (default random).")
@click.option("--noiseless", is_flag=True, help="Disable additive noise.")
@click.option("--grid-point", type=int, default=None, help="Source on a grid point.")
@click.option("--grid-level", type=int, default=None, help="Grid for --grid-point.")
@click.option("--direction", default=None, help="Source direction as x,y,z.")
@click.option(
    "--signal",
    "signal_kind",
    type=click.Choice([k.value for k in SignalKind]),
    default=SignalKind.NOISE.value,
    show_default=True,
)
@click.option(
    "--subtype",
    type=click.Choice(SUPPORTED_SUBTYPES, case_sensitive=False),
    default="FLOAT",
    show_default=True,
)
@click.pass_context
@handle_errors("simulate")
def simulate(
    ctx: click.Context,
    array_name: str,
    output_path: Path,
    seed: int,
    seconds: Optional[float],
    snr: Optional[float],
    noiseless: bool,
    grid_point: Optional[int],
    grid_level: Optional[int],
    direction: Optional[str],
    signal_kind: str,
    subtype: str,
) -> None:
    """Simulate a free-field recording of one source."""
    config = _config(ctx)
    if grid_point is not None and direction is not None:
        raise ValidationError(
            "Use either --grid-point or --direction, not both", "CONFLICTING_OPTIONS"
        )
    if noiseless and snr is not None:
        raise ValidationError(
            "Use either --snr or --noiseless, not both", "CONFLICTING_OPTIONS"
        )
    if seed < 0:
        raise ValidationError(f"seed must be non-negative, got {seed}", "INVALID_SEED")

    run = _run_config(seed=seed, output_path=validate_output_path(output_path))
    array = _array(ctx, array_name)
    duration = config.signal_seconds if seconds is None else seconds
    n_samples = int(round(duration * array.sample_rate))
    scene = random_scene(
        array, seed, n_samples, config.snr_range_db, SignalKind(signal_kind)
    )

    grid_index = None
    if grid_point is not None:
        level = config.grid_level if grid_level is None else grid_level
        grid = build_grid(validate_grid_level(level))
        if not 0 <= grid_point < grid.size:
            raise ValidationError(
                f"--grid-point must be in [0, {grid.size}), got {grid_point}",
                "INVALID_GRID_POINT",
            )
        grid_index = grid_point
        scene = replace(scene, direction=grid.points[grid_point])
    elif direction is not None:
        scene = replace(
            scene, direction=validate_unit_vector(_parse_direction(direction))
        )

    if noiseless:
        scene = replace(scene, snr_db=float("inf"))
    elif snr is not None:
        scene = replace(scene, snr_db=snr)

    assert run.output_path is not None
    write_wav(run.output_path, simulate_scene(scene), array.sample_rate, subtype)
    truth_path = run.output_path.with_suffix(".json")
    truth_path.write_text(scene.truth(grid_index).model_dump_json(indent=2) + "\n")
    log(f"✅ Wrote {run.output_path} and {truth_path}")


def _configs(ctx: click.Context, geometries: str) -> Iterator[ArrayConfig]:
    for name in geometries.split(","):
        if name.strip():
            yield _array(ctx, name.strip())


@cli.command()
@click.option("--geometries", default=DEFAULT_GEOMETRIES, show_default=True)
@click.option("--deltas", default=DEFAULT_DELTAS, show_default=True)
@click.option("--scenes", type=int, default=None, help="Scenes per geometry.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--grid-level", type=int, default=None, help="Grid subdivisions.")
@click.option("--seconds", type=float, default=None, help="Scene duration.")
@click.option(
    "--signal",
    "signal_kind",
    type=click.Choice([k.value for k in SignalKind]),
    default=SignalKind.NOISE.value,
    show_default=True,
)
@click.option(
    "--output",
    "-o",
    "output_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="CSV file (default stdout); settings go to <output>.meta.json.",
)
@click.option("--no-timing", is_flag=True, help="Write 0.0 in the fps columns.")
@click.pass_context
@handle_errors("benchmark")
def benchmark(
    ctx: click.Context,
    geometries: str,
    deltas: str,
    scenes: Optional[int],
    seed: int,
    grid_level: Optional[int],
    seconds: Optional[float],
    signal_kind: str,
    output_path: Optional[Path],
    no_timing: bool,
) -> None:
    """Sweep delta over several geometries and compare with SRP-PHAT."""
    config = _config(ctx)
    if seed < 0:
        raise ValidationError(f"seed must be non-negative, got {seed}", "INVALID_SEED")
    delta_values = parse_deltas(deltas)
    level = validate_grid_level(config.grid_level if grid_level is None else grid_level)
    run = _run_config(
        grid_level=level, seed=seed, threads=config.threads, output_path=output_path
    )
    configs = list(_configs(ctx, geometries))
    if not configs:
        raise ValidationError("No geometry given", "UNKNOWN_GEOMETRY")

    start = time.perf_counter()
    report = benchmark_sweep(
        configs,
        delta_values,
        scenes=config.scenes if scenes is None else scenes,
        seed=run.seed,
        grid_level=run.grid_level,
        signal_seconds=config.signal_seconds if seconds is None else seconds,
        snr_range=config.snr_range_db,
        signal_kind=SignalKind(signal_kind),
        threads=run.threads,
        timing=not no_timing,
        leaf_size=config.leaf_size,
        max_steering_bytes=config.max_steering_bytes,
    )

    stream = _open_output(run.output_path)
    try:
        write_benchmark_csv(report.rows, stream)
    finally:
        if run.output_path is not None:
            stream.close()

    if run.output_path is not None:
        meta_path = run.output_path.with_name(run.output_path.name + ".meta.json")
        meta_path.write_text(report.metadata.model_dump_json(indent=2) + "\n")
        log(f"✅ Wrote {run.output_path} and {meta_path}")

    if config.log_level != "quiet":
        render_benchmark_table(report.rows, report.visited_leaves, get_console())
    log(f"⏱️  Benchmark finished in {measure_time_ms(start) / 1000:.1f} s")


@cli.command("inspect-model")
@click.option(
    "--model",
    "model_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Model file to describe.",
)
@click.pass_context
@handle_errors("inspect-model")
def inspect_model_command(ctx: click.Context, model_path: Path) -> None:
    """Print the header and fit diagnostics of a model file as JSON."""
    click.echo(json.dumps(inspect_model(model_path), indent=2))


def main() -> None:
    """Main entry point for the doa command."""
    try:
        cli(prog_name="doa")
    except KeyboardInterrupt:
        error("Interrupted by user")
        sys.exit(130)


if __name__ == "__main__":
    main()
