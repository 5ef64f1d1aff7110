"""
Tests for console and output helpers.
"""

import csv
import io
import json
import time

from svdphat.exceptions import ModelFileError, SignalError
from svdphat.models import BenchmarkRow, DoaEstimate, Method
from svdphat.reporting import (
    BENCHMARK_COLUMNS,
    ESTIMATE_COLUMNS,
    create_error_response,
    format_float,
    get_error_code_for_exception,
    measure_time_ms,
    write_benchmark_csv,
    write_estimates,
)
from svdphat.validation import ValidationError


def _estimates():
    return [
        DoaEstimate(frame=0, index=4, direction=(0.0, 0.6, 0.8), energy=10.5),
        DoaEstimate.invalid(1, Method.SVD),
    ]


class TestErrorResponses:
    """Test standardized error responses."""

    def test_create_error_response_minimal(self):
        """Test response with code and message only."""
        response = json.loads(create_error_response("CODE", "message"))
        assert response == {
            "success": False,
            "error_code": "CODE",
            "error_message": "message",
        }

    def test_create_error_response_full(self):
        """Test response with operation and path."""
        response = json.loads(
            create_error_response("CODE", "message", "localize", "/tmp/a.wav")
        )
        assert response["operation"] == "localize"
        assert response["path"] == "/tmp/a.wav"

    def test_error_code_from_package_errors(self):
        """Test codes carried by package exceptions."""
        assert (
            get_error_code_for_exception(ModelFileError("x", "MODEL_CHECKSUM_MISMATCH"))
            == "MODEL_CHECKSUM_MISMATCH"
        )
        assert get_error_code_for_exception(SignalError("x")) == "SIGNAL_ERROR"
        assert (
            get_error_code_for_exception(ValidationError("x", "INVALID_DELTA"))
            == "INVALID_DELTA"
        )

    def test_error_code_from_builtin_errors(self):
        """Test codes for standard exceptions."""
        assert get_error_code_for_exception(FileNotFoundError()) == "FILE_NOT_FOUND"
        assert get_error_code_for_exception(PermissionError()) == "PERMISSION_DENIED"
        assert get_error_code_for_exception(OSError()) == "IO_ERROR"
        assert get_error_code_for_exception(ValueError()) == "INVALID_REQUEST"
        assert get_error_code_for_exception(RuntimeError()) == "UNKNOWN_ERROR"


class TestMeasureTime:
    """Test timing helper."""

    def test_measure_time_ms(self):
        """Test elapsed time is positive and in milliseconds."""
        start = time.perf_counter()
        time.sleep(0.01)
        elapsed = measure_time_ms(start)
        assert 5.0 <= elapsed < 5000.0


class TestWriteEstimates:
    """Test per-frame output."""

    def test_csv_output(self):
        """Test header and row layout."""
        stream = io.StringIO()
        count = write_estimates(_estimates(), stream)

        rows = list(csv.reader(io.StringIO(stream.getvalue())))
        assert count == 2
        assert rows[0] == ESTIMATE_COLUMNS
        assert rows[1] == ["0", "4", "0.0", "0.6", "0.8", "10.5", "true", "svd"]
        assert rows[2][1] == "-1"
        assert rows[2][6] == "false"

    def test_json_lines_output(self):
        """Test one JSON object per line."""
        stream = io.StringIO()
        count = write_estimates(_estimates(), stream, json_lines=True)

        lines = stream.getvalue().splitlines()
        assert count == 2
        assert json.loads(lines[0])["index"] == 4
        assert json.loads(lines[1])["valid"] is False

    def test_float_text_round_trips(self):
        """Test float cells parse back to the same value."""
        value = 0.1 + 0.2
        assert float(format_float(value)) == value


class TestWriteBenchmarkCsv:
    """Test benchmark CSV output."""

    def test_header_and_values(self):
        """Test fixed header and column order."""
        row = BenchmarkRow.build(
            geometry="2d",
            delta=1e-2,
            rank=40,
            n_points=2562,
            rmse_svd=0.3,
            rmse_srp=0.25,
            fps_svd=0.0,
            fps_srp=0.0,
        )
        stream = io.StringIO()
        write_benchmark_csv([row], stream)

        rows = list(csv.reader(io.StringIO(stream.getvalue())))
        assert rows[0] == BENCHMARK_COLUMNS
        assert rows[1][0] == "2d"
        assert float(rows[1][1]) == 1e-2
        assert rows[1][2] == "40"
        assert float(rows[1][3]) == 2562 / 40
        assert float(rows[1][6]) == 0.3 - 0.25
