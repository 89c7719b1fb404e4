"""Convergence figures from solver trace CSVs."""

from .core import (
    MODES,
    TRACE_HEADER,
    TraceFile,
    TraceFormatError,
    plot_traces,
    read_trace,
)

__all__ = [
    "MODES",
    "TRACE_HEADER",
    "TraceFile",
    "TraceFormatError",
    "plot_traces",
    "read_trace",
]
