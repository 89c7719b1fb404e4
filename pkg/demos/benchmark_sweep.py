"""Run a full benchmark sweep and summarize iterations-to-tolerance.

Same machinery as the ``fixedrank run`` / ``fixedrank compare`` console
commands: every (geometry, solver) pair runs on each instance, one CSV
trace per run lands in the output directory next to a JSON summary, and
the comparison table reads those traces back.

The default benchmark (1000x1000, rank 5, five instances) takes a couple
of minutes; pass --quick for a desk-size sweep.
"""

import argparse
import sys

from fixedrank.harness import ExperimentConfig, compare_geometries, run_experiment


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="sweep_out", help="output directory")
    parser.add_argument("--quick", action="store_true",
                        help="small instances instead of the full benchmark")
    args = parser.parse_args(argv)

    if args.quick:
        config = ExperimentConfig(d1=200, d2=200, rank=3, oversampling=6.0,
                                  seed=0, instances=2)
    else:
        config = ExperimentConfig()  # 1000x1000, rank 5, OS 8, 5 instances

    print("sweep: {}x{} rank {} OS {:g}, {} instance(s)".format(
        config.d1, config.d2, config.rank, config.oversampling,
        config.instances))
    summary = run_experiment(config, args.out)
    failures = [r for r in summary["runs"] if r["status"] != "ok"]
    print("{} runs, {} failed; traces in {}/".format(
        len(summary["runs"]), len(failures), args.out))

    print("\niterations to cost 1e-6 by trace:")
    print(compare_geometries(args.out, level=1e-6))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
