"""Experiment orchestration: seeded problem generation, solver runs, traces.

Every run is driven by one ExperimentConfig whose single seed feeds a
splittable SeedSequence; instance k of a config is identical no matter
which geometries or solvers are requested alongside it.  Worker threads
only parallelize across independent (instance, geometry, solver) runs and
each writes its own trace file, so parallel and serial execution produce
the same bytes.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from .completion import (
    CompletionObjective,
    CompletionProblem,
    linearized_step,
    spectral_init,
    tr_radius_seed,
)
from .errors import ConfigError, FixedRankError, UndefinedDirectionError
from .geometry import GEOMETRY_TAGS, geometry_from_tag
from .sampling import SampledMatrix, pair_values, sample_positions_floyd
from .solvers import GDConfig, SolverTrace, TRConfig, gradient_descent, trust_region

WORKER_ENV = "FIXEDRANK_WORKERS"

SOLVER_TAGS = ("gd", "tr")

DEFAULT_GEOMETRIES = ("fullrank", "polar", "subspace", "embedded")


def sample_count(d1: int, d2: int, r: int, oversampling: float) -> int:
    """Observed-entry count: oversampling times the rank-r degrees of freedom."""
    return int(round(oversampling * (d1 + d2 - r) * r))


@dataclass
class ExperimentConfig:
    d1: int = 1000
    d2: int = 1000
    rank: int = 5
    oversampling: float = 8.0
    seed: int = 0
    instances: int = 5
    geometries: tuple = DEFAULT_GEOMETRIES
    solvers: tuple = SOLVER_TAGS
    unbalance: float = 1.0
    with_test: bool = True
    # Stopping overrides; None keeps each solver's default.
    max_iters: Optional[int] = None
    cost_stop: Optional[float] = None
    grad_norm_stop: Optional[float] = None

    def __post_init__(self):
        self.geometries = tuple(self.geometries)
        self.solvers = tuple(self.solvers)
        if self.rank < 1 or self.rank > min(self.d1, self.d2):
            raise ConfigError(f"rank {self.rank} invalid for {self.d1}x{self.d2}")
        n = sample_count(self.d1, self.d2, self.rank, self.oversampling)
        budget = self.d1 * self.d2
        needed = 2 * n if self.with_test else n
        if needed > budget:
            raise ConfigError(
                f"requested {needed} sample positions but the matrix has {budget}"
            )
        for tag in self.geometries:
            try:
                geometry_from_tag(tag)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for solver in self.solvers:
            if solver not in SOLVER_TAGS:
                raise ConfigError(f"unknown solver {solver!r}")
        if self.instances < 1:
            raise ConfigError("need at least one instance")

    def gd_config(self, initial_step: float) -> GDConfig:
        cfg = GDConfig(initial_step=initial_step)
        if self.max_iters is not None:
            cfg.max_iters = self.max_iters
        if self.cost_stop is not None:
            cfg.cost_stop = self.cost_stop
        if self.grad_norm_stop is not None:
            cfg.grad_norm_stop = self.grad_norm_stop
        return cfg

    def tr_config(self, radius0: float, radius_max: float) -> TRConfig:
        cfg = TRConfig(radius0=radius0, radius_max=radius_max)
        if self.max_iters is not None:
            cfg.max_outer = self.max_iters
        if self.cost_stop is not None:
            cfg.cost_stop = self.cost_stop
        if self.grad_norm_stop is not None:
            cfg.grad_norm_stop = self.grad_norm_stop
        return cfg


def config_from_json(path) -> ExperimentConfig:
    with open(path) as fh:
        data = json.load(fh)
    return ExperimentConfig(**data)


def generate_problem(config: ExperimentConfig, instance: int = 0) -> CompletionProblem:
    """Seeded random rank-r completion problem.

    The ground truth is a product of two standard Gaussian factors; the
    observed set (and an equally large disjoint test set when requested)
    is sampled uniformly without replacement.
    """
    root = np.random.SeedSequence(config.seed)
    child = root.spawn(config.instances)[instance % config.instances]
    rng = np.random.default_rng(child)
    d1, d2, r = config.d1, config.d2, config.rank
    left = rng.standard_normal((d1, r))
    right = rng.standard_normal((d2, r))
    n = sample_count(d1, d2, r, config.oversampling)
    total = 2 * n if config.with_test else n
    lin = sample_positions_floyd(rng, d1 * d2, total)
    if config.with_test:
        perm = rng.permutation(total)
        train_lin = lin[perm[:n]]
        test_lin = lin[perm[n:]]
    else:
        train_lin, test_lin = lin, None

    def as_sampled(linear: np.ndarray) -> SampledMatrix:
        rows = linear // d2
        cols = linear % d2
        vals = pair_values(left, right, rows, cols)
        return SampledMatrix.from_entries(d1, d2, rows, cols, vals)

    train = as_sampled(train_lin)
    test = as_sampled(test_lin) if test_lin is not None else None
    return CompletionProblem(train, r, test=test)


def run_single(
    problem: CompletionProblem,
    geometry_tag: str,
    solver_tag: str,
    config: ExperimentConfig,
):
    """One (geometry, solver) run on one problem instance.

    Returns (trace, record).  Any solver failure is captured in the record
    so a sweep continues past it.
    """
    record = {"geometry": geometry_tag, "solver": solver_tag}
    t0 = time.perf_counter()
    try:
        geometry = geometry_from_tag(geometry_tag)
        objective = CompletionObjective(problem, geometry)
        x0 = spectral_init(problem, geometry, unbalance=config.unbalance)
        grad0, _ = objective.grad(x0)
        try:
            s0 = linearized_step(objective, x0, -grad0)
        except UndefinedDirectionError:
            s0 = 1.0  # already at a critical point; the solver stops at once
        record["s0"] = s0
        if solver_tag == "gd":
            x, trace = gradient_descent(objective, x0, config.gd_config(s0))
        else:
            delta0, delta_max = tr_radius_seed(s0, grad0, geometry, x0)
            record["delta0"] = delta0
            record["delta_max"] = delta_max
            x, trace = trust_region(objective, x0, config.tr_config(delta0, delta_max))
        record.update(
            status="ok",
            final_cost=trace.final_cost,
            iterations=trace.n_iters,
            test_rmse=objective.test_rmse(x),
            wall_time_s=time.perf_counter() - t0,
        )
        return trace, record
    except (FixedRankError, NotImplementedError, np.linalg.LinAlgError) as exc:
        record.update(
            status="error",
            error=f"{type(exc).__name__}: {exc}",
            wall_time_s=time.perf_counter() - t0,
        )
        trace = getattr(exc, "trace", None)
        return trace, record


def trace_filename(geometry_tag: str, solver_tag: str, instance: int) -> str:
    return f"{geometry_tag}_{solver_tag}_inst{instance}.csv"


def _worker_count() -> int:
    env = os.environ.get(WORKER_ENV, "")
    if env.strip():
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Run every (instance, geometry, solver) combination of the config.

    Writes one CSV trace per run plus summary.json into out_dir and
    returns the summary dict.  Runs execute in a thread pool sized by the
    FIXEDRANK_WORKERS environment variable (default: CPU count); the
    summary order is fixed regardless of scheduling.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    problems = {
        k: generate_problem(config, instance=k) for k in range(config.instances)
    }
    jobs = [
        (k, gtag, stag)
        for k in range(config.instances)
        for gtag in config.geometries
        for stag in config.solvers
    ]

    def execute(job):
        k, gtag, stag = job
        trace, record = run_single(problems[k], gtag, stag, config)
        record["instance"] = k
        fname = trace_filename(gtag, stag, k)
        if trace is not None:
            trace.to_csv(out / fname)
            record["trace_file"] = fname
        return record

    workers = _worker_count()
    if workers == 1:
        records = [execute(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(execute, jobs))

    summary = {"config": asdict(config), "runs": records}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return summary


def compare_geometries(trace_dir, level: float = 1e-6) -> str:
    """Tabulate runs found in a trace directory as CSV text.

    Columns: trace name, final cost, iterations, iterations to reach the
    given cost level.  Files named in summary.json but missing on disk are
    listed as absent; without a summary the directory glob decides.
    """
    trace_dir = Path(trace_dir)
    summary_path = trace_dir / "summary.json"
    if summary_path.exists():
        with open(summary_path) as fh:
            summary = json.load(fh)
        names = [
            r.get("trace_file", trace_filename(r["geometry"], r["solver"], r["instance"]))
            for r in summary["runs"]
        ]
    else:
        names = sorted(p.name for p in trace_dir.glob("*.csv"))
    lines = [f"trace,final_cost,iterations,iters_to_{level:g}"]
    for name in names:
        path = trace_dir / name
        if not path.exists():
            lines.append(f"{name},absent,absent,absent")
            continue
        trace = SolverTrace.from_csv(path)
        hit = trace.iterations_to_cost(level)
        lines.append(
            f"{name},{trace.final_cost!r},{trace.n_iters},"
            f"{hit if hit is not None else 'never'}"
        )
    return "\n".join(lines) + "\n"
