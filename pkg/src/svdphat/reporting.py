"""
Console and output helpers.

Status lines go to stderr through a rich console; data records (CSV, JSON
lines) are written to the stream the caller hands in.
"""

import csv
import json
import time
from typing import IO, Any, Dict, Iterable, List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from .models import BenchmarkRow, DoaEstimate

ESTIMATE_COLUMNS = ["frame", "index", "x", "y", "z", "energy", "valid", "method"]
BENCHMARK_COLUMNS = [
    "geometry",
    "delta",
    "K",
    "gain",
    "rmse_svd",
    "rmse_srp",
    "delta_rmse",
    "fps_svd",
    "fps_srp",
]

_console = Console(stderr=True, highlight=False, soft_wrap=True)
_levels = {"quiet": 0, "info": 1, "debug": 2}
_level = 1


def set_log_level(level: str) -> None:
    """Set verbosity: quiet, info or debug."""
    global _level
    _level = _levels[level]


def get_console() -> Console:
    return _console


def log(message: str) -> None:
    """Print an informational status line."""
    if _level >= 1:
        _console.print(message)


def debug(message: str) -> None:
    if _level >= 2:
        _console.print(f"[dim]{message}[/dim]")


def error(message: str) -> None:
    """Print an error line; never silenced."""
    _console.print(f"❌ {message}", style="red", markup=False)


def measure_time_ms(start_time: float) -> float:
    """
    Calculate elapsed time in milliseconds.

    Args:
        start_time: Start time from time.perf_counter()

    Returns:
        Elapsed time in milliseconds
    """
    return (time.perf_counter() - start_time) * 1000


def create_error_response(
    error_code: str,
    error_message: str,
    operation: Optional[str] = None,
    path: Optional[str] = None,
) -> str:
    """
    Create a standardized error response.

    Args:
        error_code: Error code identifier
        error_message: Human-readable error message
        operation: Optional subcommand that failed
        path: Optional file path that caused the error

    Returns:
        JSON string with error details
    """
    error_response: Dict[str, Any] = {
        "success": False,
        "error_code": error_code,
        "error_message": error_message,
    }

    if operation:
        error_response["operation"] = operation

    if path:
        error_response["path"] = path

    return json.dumps(error_response)


def get_error_code_for_exception(error: Exception) -> str:
    """
    Get appropriate error code for exception type.

    Args:
        error: Exception to categorize

    Returns:
        Error code string
    """
    code = getattr(error, "error_code", None)
    if isinstance(code, str):
        return code
    elif isinstance(error, FileNotFoundError):
        return "FILE_NOT_FOUND"
    elif isinstance(error, PermissionError):
        return "PERMISSION_DENIED"
    elif isinstance(error, OSError):
        return "IO_ERROR"
    elif isinstance(error, ValueError):
        return "INVALID_REQUEST"
    else:
        return "UNKNOWN_ERROR"


def format_float(value: float) -> str:
    """Stable text form used in every CSV cell."""
    return repr(float(value))


def estimate_row(estimate: DoaEstimate) -> List[str]:
    x, y, z = estimate.direction
    return [
        str(estimate.frame),
        str(estimate.index),
        format_float(x),
        format_float(y),
        format_float(z),
        format_float(estimate.energy),
        "true" if estimate.valid else "false",
        estimate.method.value,
    ]


def write_estimates(
    estimates: Iterable[DoaEstimate], stream: IO[str], json_lines: bool = False
) -> int:
    """
    Write per-frame estimates as CSV (with header) or JSON lines.

    Returns:
        Number of records written
    """
    count = 0
    if json_lines:
        for estimate in estimates:
            stream.write(estimate.model_dump_json() + "\n")
            count += 1
        return count

    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ESTIMATE_COLUMNS)
    for estimate in estimates:
        writer.writerow(estimate_row(estimate))
        count += 1
    return count


def write_benchmark_csv(rows: Sequence[BenchmarkRow], stream: IO[str]) -> None:
    """Write benchmark rows with the fixed header."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(BENCHMARK_COLUMNS)
    for row in rows:
        record = row.model_dump()
        writer.writerow(
            [
                record["geometry"],
                format_float(record["delta"]),
                str(record["K"]),
                format_float(record["gain"]),
                format_float(record["rmse_svd"]),
                format_float(record["rmse_srp"]),
                format_float(record["delta_rmse"]),
                format_float(record["fps_svd"]),
                format_float(record["fps_srp"]),
            ]
        )


def render_benchmark_table(
    rows: Sequence[BenchmarkRow],
    visited_leaves: Optional[Sequence[float]] = None,
    console: Optional[Console] = None,
) -> None:
    """Print a human-readable summary of the delta sweep."""
    table = Table(title="SVD-PHAT vs SRP-PHAT")
    for column in ("geometry", "delta", "K", "Q/K", "RMSE svd", "RMSE srp", "ΔRMSE"):
        table.add_column(column, justify="right")
    table.add_column("fps svd / srp", justify="right")
    if visited_leaves is not None:
        table.add_column("leaves/query", justify="right")

    for i, row in enumerate(rows):
        cells = [
            row.geometry,
            f"{row.delta:.0e}",
            str(row.K),
            f"{row.gain:.1f}",
            f"{row.rmse_svd:.4f}",
            f"{row.rmse_srp:.4f}",
            f"{row.delta_rmse:+.4f}",
            f"{row.fps_svd:.0f} / {row.fps_srp:.0f}",
        ]
        if visited_leaves is not None:
            cells.append(f"{visited_leaves[i]:.1f}")
        table.add_row(*cells)

    (console or _console).print(table)
