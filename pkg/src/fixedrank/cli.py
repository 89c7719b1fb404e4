"""Command-line front end: generate problems, run sweeps, check geometry,
compare traces.

Flags mirror ExperimentConfig; a JSON file passed with --config supplies
values that explicit flags override.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from .completion import CompletionObjective, spectral_init
from .errors import FixedRankError
from .geometry import GEOMETRY_TAGS, geometry_from_tag
from .harness import (
    DEFAULT_GEOMETRIES,
    ExperimentConfig,
    SOLVER_TAGS,
    compare_geometries,
    generate_problem,
    run_experiment,
)
from .manifold import check_gradient, check_hessian
from .sampling import write_matrix_market


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file with config fields")
    parser.add_argument("--d1", type=int)
    parser.add_argument("--d2", type=int)
    parser.add_argument("--rank", type=int)
    parser.add_argument("--oversampling", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--instances", type=int)
    parser.add_argument(
        "--geometries", nargs="+", choices=GEOMETRY_TAGS, metavar="TAG"
    )
    parser.add_argument("--solvers", nargs="+", choices=SOLVER_TAGS)
    parser.add_argument("--unbalance", type=float)
    parser.add_argument(
        "--no-test", action="store_true", help="skip the held-out test set"
    )
    parser.add_argument("--max-iters", type=int, dest="max_iters")
    parser.add_argument("--cost-stop", type=float, dest="cost_stop")
    parser.add_argument("--grad-norm-stop", type=float, dest="grad_norm_stop")


def _config_from_args(args) -> ExperimentConfig:
    values: dict = {}
    if args.config is not None:
        with open(args.config) as fh:
            values.update(json.load(fh))
    names = {f.name for f in dataclass_fields(ExperimentConfig)}
    for name in names:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if getattr(args, "no_test", False):
        values["with_test"] = False
    unknown = set(values) - names
    if unknown:
        raise SystemExit(f"unknown config fields: {sorted(unknown)}")
    return ExperimentConfig(**values)


def _cmd_generate(args) -> int:
    config = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(config.instances):
        problem = generate_problem(config, instance=k)
        write_matrix_market(out / f"train_inst{k}.mtx", problem.train)
        if problem.test is not None:
            write_matrix_market(out / f"test_inst{k}.mtx", problem.test)
    meta = {
        "d1": config.d1,
        "d2": config.d2,
        "rank": config.rank,
        "oversampling": config.oversampling,
        "seed": config.seed,
        "instances": config.instances,
        "train_nnz": problem.train.nnz,
    }
    with open(out / "problem.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {config.instances} instance(s) to {out}")
    return 0


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    summary = run_experiment(config, args.out)
    failures = [r for r in summary["runs"] if r["status"] != "ok"]
    for r in summary["runs"]:
        label = f"{r['geometry']}/{r['solver']}/inst{r['instance']}"
        if r["status"] == "ok":
            print(
                f"{label}: cost {r['final_cost']:.3e} in {r['iterations']} iters, "
                f"rmse {r['test_rmse']:.3e}, {r['wall_time_s']:.2f}s"
            )
        else:
            print(f"{label}: ERROR {r['error']}")
    print(f"summary written to {Path(args.out) / 'summary.json'}")
    return 1 if failures else 0


def _cmd_check(args) -> int:
    config = _config_from_args(args)
    tags = config.geometries or DEFAULT_GEOMETRIES
    problem = generate_problem(config, instance=0)
    rng = np.random.default_rng(config.seed)
    failed = False
    for tag in tags:
        geometry = geometry_from_tag(tag)
        objective = CompletionObjective(problem, geometry)
        try:
            x = spectral_init(problem, geometry)
            grad_report = check_gradient(objective, x, rng)
            line = f"{tag}: gradient slope {grad_report.slope:.3f}"
            ok = grad_report.passed
            try:
                hess_report = check_hessian(objective, x, rng)
                line += (
                    f", hessian slope {hess_report.slope:.3f}, "
                    f"symmetry defect {hess_report.symmetry_defect:.2e}"
                )
                ok = ok and hess_report.symmetry_passed
            except NotImplementedError:
                line += ", hessian: not available"
        except FixedRankError as exc:
            line, ok = f"{tag}: ERROR {type(exc).__name__}: {exc}", False
        print(line + ("  [ok]" if ok else "  [FAIL]"))
        failed = failed or not ok
    return 1 if failed else 0


def _cmd_compare(args) -> int:
    table = compare_geometries(args.dir, level=args.level)
    sys.stdout.write(table)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixedrank",
        description="Fixed-rank matrix completion via quotient-geometry solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write sampled problems as MatrixMarket")
    _add_config_flags(p_gen)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=_cmd_generate)

    p_run = sub.add_parser("run", help="run solver sweeps, write traces + summary")
    _add_config_flags(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="first/second-order diagnostics")
    _add_config_flags(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_cmp = sub.add_parser("compare", help="tabulate traces in a directory")
    p_cmp.add_argument("--dir", required=True)
    p_cmp.add_argument("--level", type=float, default=1e-6)
    p_cmp.set_defaults(func=_cmd_compare)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FixedRankError as exc:
        print(f"fixedrank: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
