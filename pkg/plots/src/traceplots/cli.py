"""Script entry point: expand trace globs and write one figure."""

import argparse
import glob
import sys

from .core import MODES, plot_traces


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="traceplots",
        description="Render a convergence figure from solver trace CSVs.",
    )
    parser.add_argument(
        "traces", nargs="+",
        help="trace CSV paths or globs (e.g. 'out/*.csv')",
    )
    parser.add_argument("--mode", choices=MODES, default="iterations",
                        help="x axis: iteration count or wall time")
    parser.add_argument("--out", default="traces.svg",
                        help="output image path (.svg or .png)")
    args = parser.parse_args(argv)

    paths = []
    for pattern in args.traces:
        matched = sorted(glob.glob(pattern))
        paths.extend(matched if matched else [])
    if not paths:
        parser.error("no files match the given trace patterns")
    try:
        out = plot_traces(paths, mode=args.mode, out=args.out)
    except ValueError as exc:
        parser.error(str(exc))
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
