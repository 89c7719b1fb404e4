"""Parse solver trace CSVs and render convergence figures.

A trace file is the per-iteration CSV a solver run writes: one fixed
header, one row per iteration, floats in repr form with nan for columns
a solver does not fill.  This module treats that header as a frozen
contract and knows nothing else about the producer.
"""

import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

# The producer-side trace contract, byte for byte.
TRACE_HEADER = (
    "iter",
    "cost",
    "grad_norm",
    "step_or_radius",
    "backtracks",
    "inner_iters",
    "rho",
    "time_s",
)

MODES = ("iterations", "time")

# Fixed salt so SVG element ids do not change between renders.
_HASH_SALT = "traceplots"


class TraceFormatError(ValueError):
    """A file does not follow the trace CSV contract."""


@dataclass
class TraceFile:
    """One parsed trace: its path and the columns keyed by header name."""

    path: Path
    columns: dict

    @property
    def label(self) -> str:
        return self.path.stem

    def column(self, name: str) -> list:
        return self.columns[name]


def read_trace(path) -> TraceFile:
    """Parse one trace CSV, enforcing the header and a monotone iter column."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        if tuple(header) != TRACE_HEADER:
            raise TraceFormatError(
                f"{path}: header {header!r} does not match the trace contract"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_HEADER):
                raise TraceFormatError(
                    f"{path}:{lineno}: expected {len(TRACE_HEADER)} fields, "
                    f"got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise TraceFormatError(f"{path}: no data rows")
    columns = {
        name: [row[i] for row in rows] for i, name in enumerate(TRACE_HEADER)
    }
    iters = columns["iter"]
    if any(b <= a or math.isnan(b) for a, b in zip(iters, iters[1:])) or any(
        math.isnan(v) for v in iters[:1]
    ):
        raise TraceFormatError(f"{path}: iteration column is not increasing")
    return TraceFile(path=path, columns=columns)


def plot_traces(paths, mode: str = "iterations", out: str = "traces.svg") -> Path:
    """Render a log-cost convergence chart from trace files.

    mode selects the x axis: iteration count or elapsed wall time.  Files
    that do not parse are reported on stderr and skipped; at least one
    valid trace is required.  The output format follows the extension of
    ``out`` (.svg or .png), and SVG output carries no timestamp so a
    rerun on the same inputs is byte-identical.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    paths = list(paths)
    if not paths:
        raise ValueError("no trace files given")
    traces = []
    for p in paths:
        try:
            traces.append(read_trace(p))
        except (TraceFormatError, OSError) as exc:
            print(f"traceplots: skipping {p}: {exc}", file=sys.stderr)
    if not traces:
        raise ValueError("none of the given files is a valid trace")

    xcol = "iter" if mode == "iterations" else "time_s"
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot(111)
    for trace in traces:
        ax.plot(trace.column(xcol), trace.column("cost"),
                linewidth=1.4, label=trace.label)
    ax.set_yscale("log")
    ax.set_xlabel("iteration" if mode == "iterations" else "time (s)")
    ax.set_ylabel("cost")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")

    out = Path(out)
    with matplotlib.rc_context({"svg.hashsalt": _HASH_SALT}):
        if out.suffix.lower() == ".png":
            FigureCanvasAgg(fig)
            fig.savefig(out, format="png", dpi=120)
        else:
            FigureCanvasSVG(fig)
            # a Date entry would break byte-stable reruns
            fig.savefig(out, format="svg", metadata={"Date": None})
    return out
