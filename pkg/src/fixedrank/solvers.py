"""Geometry-agnostic first- and second-order descent.

Both solvers consume an objective exposing ``geometry``, ``cost(x)``,
``grad(x) -> (gradient, cache)`` and ``hess(x, xi, cache)``.  They never
touch factor internals, so any geometry satisfying the manifold contract
works unchanged.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, LineSearchError, RankDropError
from .factors import FactorTuple

_NAN = float("nan")

# tCG exit conditions.
TCG_CONVERGED = "converged"
TCG_BOUNDARY = "boundary"
TCG_NEGATIVE_CURVATURE = "negative-curvature"
TCG_MAX_INNER = "max-inner"


@dataclass
class GDConfig:
    """Armijo gradient-descent settings."""

    max_iters: int = 200
    cost_stop: float = 1e-20
    grad_norm_stop: float = 1e-12
    sufficient_decrease: float = 1e-4
    contraction: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 50

    def __post_init__(self):
        if not 0.0 < self.sufficient_decrease < 1.0:
            raise ConfigError("sufficient_decrease must lie in (0, 1)")
        if not 0.0 < self.contraction < 1.0:
            raise ConfigError("contraction must lie in (0, 1)")
        if self.initial_step <= 0.0:
            raise ConfigError("initial_step must be positive")
        if self.max_iters < 0 or self.max_backtracks < 1:
            raise ConfigError("iteration limits out of range")


@dataclass
class TRConfig:
    """Trust-region settings."""

    max_outer: int = 100
    max_inner: int = 100
    theta: float = 1.0
    kappa: float = 0.1
    radius0: float = 1.0
    radius_max: float = 1024.0
    cost_stop: float = 1e-20
    grad_norm_stop: float = 1e-12
    accept_ratio: float = 0.1
    grow_ratio: float = 0.75
    shrink_factor: float = 0.25
    grow_factor: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise ConfigError("kappa must lie in (0, 1)")
        if self.theta <= 0.0:
            raise ConfigError("theta must be positive")
        if not 0.0 < self.radius0 <= self.radius_max:
            raise ConfigError("need 0 < radius0 <= radius_max")
        if self.max_outer < 0 or self.max_inner < 1:
            raise ConfigError("iteration limits out of range")


_TRACE_COLUMNS = (
    "iter",
    "cost",
    "grad_norm",
    "step_or_radius",
    "backtracks",
    "inner_iters",
    "rho",
    "time_s",
)
_INT_COLUMNS = {"iter", "backtracks", "inner_iters"}


@dataclass
class SolverTrace:
    """Per-iteration record of a solver run.

    Row 0 describes the starting point; the step, backtrack, inner-count,
    and ratio columns that do not apply to a given solver hold nan.
    """

    columns: tuple = _TRACE_COLUMNS
    rows: list = field(default_factory=list)

    def add(self, **kw) -> None:
        self.rows.append([float(kw.get(c, _NAN)) for c in self.columns])

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    @property
    def n_iters(self) -> int:
        return max(len(self.rows) - 1, 0)

    @property
    def final_cost(self) -> float:
        return self.rows[-1][self.columns.index("cost")] if self.rows else _NAN

    def iterations_to_cost(self, level: float) -> Optional[int]:
        """First iteration index at which the cost is at or below level."""
        it = self.columns.index("iter")
        c = self.columns.index("cost")
        for row in self.rows:
            if row[c] <= level:
                return int(row[it])
        return None

    # -- CSV ------------------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                cells = []
                for name, v in zip(self.columns, row):
                    if math.isnan(v):
                        cells.append("nan")
                    elif name in _INT_COLUMNS:
                        cells.append(str(int(v)))
                    else:
                        # repr round-trips doubles exactly.
                        cells.append(repr(v))
                fh.write(",".join(cells) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SolverTrace":
        with open(path) as fh:
            header = tuple(fh.readline().strip().split(","))
            if header != _TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header: {header}")
            rows = [
                [float(tok) for tok in line.strip().split(",")]
                for line in fh
                if line.strip()
            ]
        return cls(columns=header, rows=rows)


def adaptive_step_update(s_guess: float, s_accepted: float, backtracks: int) -> float:
    """Next initial step guess from the last line search.

    Doubles the guess when it was accepted immediately; otherwise restarts
    from twice the step that survived backtracking.
    """
    if s_guess <= 0.0 or s_accepted <= 0.0:
        raise ValueError("step sizes must be positive")
    if backtracks < 0:
        raise ValueError("backtrack count must be nonnegative")
    if backtracks == 0:
        return 2.0 * s_guess
    return 2.0 * s_accepted


def armijo_backtrack(objective, x, direction: FactorTuple, grad: FactorTuple,
                     s_guess: float, f0: float, config: GDConfig):
    """Largest step s_guess * contraction^j satisfying sufficient decrease.

    Returns (s, j, x_new, f_new).  A retraction that leaves the rank-r set
    counts as a failed trial and contracts like an Armijo rejection.
    """
    geometry = objective.geometry
    slope = geometry.metric(x, grad, direction)
    if slope >= 0.0:
        raise LineSearchError(
            f"not a descent direction: directional derivative {slope:.3e} >= 0"
        )
    s = s_guess
    for j in range(config.max_backtracks + 1):
        try:
            x_new = geometry.retract(x, s * direction)
        except RankDropError:
            s *= config.contraction
            continue
        f_new = objective.cost(x_new)
        if f_new <= f0 + config.sufficient_decrease * s * slope:
            return s, j, x_new, f_new
        s *= config.contraction
    raise LineSearchError(
        f"no acceptable step within {config.max_backtracks} contractions "
        f"(guess {s_guess:.3e})"
    )


def gradient_descent(objective, x0, config: Optional[GDConfig] = None):
    """Armijo descent along the negative Riemannian gradient.

    Returns (x, SolverTrace).  The cost over accepted iterates decreases
    strictly until a stopping test fires.
    """
    config = config or GDConfig()
    geometry = objective.geometry
    trace = SolverTrace()
    t_start = time.perf_counter()

    x = x0
    f = objective.cost(x)
    grad, _ = objective.grad(x)
    gnorm = geometry.norm(x, grad)
    trace.add(iter=0, cost=f, grad_norm=gnorm, time_s=time.perf_counter() - t_start)
    if f <= config.cost_stop or gnorm <= config.grad_norm_stop:
        return x, trace

    s_guess = config.initial_step
    for t in range(1, config.max_iters + 1):
        try:
            s, j, x, f = armijo_backtrack(
                objective, x, -grad, grad, s_guess, f, config
            )
        except LineSearchError as exc:
            exc.trace = trace
            raise
        grad, _ = objective.grad(x)
        gnorm = geometry.norm(x, grad)
        trace.add(
            iter=t,
            cost=f,
            grad_norm=gnorm,
            step_or_radius=s,
            backtracks=j,
            time_s=time.perf_counter() - t_start,
        )
        s_guess = adaptive_step_update(s_guess, s, j)
        if f <= config.cost_stop or gnorm <= config.grad_norm_stop:
            break
    return x, trace


@dataclass
class TcgResult:
    step: FactorTuple
    hess_step: FactorTuple
    status: str
    inner_iters: int


def tcg_subproblem(geometry, x, grad: FactorTuple, hess_applier,
                   radius: float, config: TRConfig) -> TcgResult:
    """Truncated conjugate gradient on the local quadratic model.

    Runs CG from the zero step, following the last direction to the
    boundary on negative curvature or when the iterate leaves the radius.
    The inner residual threshold is ||r0|| * min(||r0||^theta, kappa).
    The Hessian action on the returned step is accumulated alongside the
    iterate, so the model decrease costs no extra Hessian application.
    """
    g = lambda u, v: geometry.metric(x, u, v)
    xi = geometry.zero_tangent(x)
    h_xi = geometry.zero_tangent(x)
    r = grad
    d = -r
    rr = g(r, r)
    r0_norm = math.sqrt(rr)
    threshold = r0_norm * min(r0_norm ** config.theta, config.kappa)
    xi_sq = 0.0

    def to_boundary(h_d, d_sq, xi_d):
        # Positive root of ||xi + tau d||_g = radius.
        disc = xi_d * xi_d + d_sq * (radius * radius - xi_sq)
        tau = (-xi_d + math.sqrt(max(disc, 0.0))) / d_sq
        return xi + tau * d, h_xi + tau * h_d

    for k in range(1, config.max_inner + 1):
        h_d = hess_applier(d)
        d_sq = g(d, d)
        curvature = g(d, h_d)
        xi_d = g(xi, d)
        if curvature <= 0.0:
            step, h_step = to_boundary(h_d, d_sq, xi_d)
            return TcgResult(step, h_step, TCG_NEGATIVE_CURVATURE, k)
        alpha = rr / curvature
        new_sq = xi_sq + 2.0 * alpha * xi_d + alpha * alpha * d_sq
        if new_sq >= radius * radius:
            step, h_step = to_boundary(h_d, d_sq, xi_d)
            return TcgResult(step, h_step, TCG_BOUNDARY, k)
        xi = xi + alpha * d
        h_xi = h_xi + alpha * h_d
        xi_sq = new_sq
        r = r + alpha * h_d
        rr_new = g(r, r)
        if math.sqrt(rr_new) <= threshold:
            return TcgResult(xi, h_xi, TCG_CONVERGED, k)
        d = -r + (rr_new / rr) * d
        rr = rr_new
    return TcgResult(xi, h_xi, TCG_MAX_INNER, config.max_inner)


def trust_region(objective, x0, config: Optional[TRConfig] = None):
    """Riemannian trust-region with truncated CG inner solves.

    Returns (x, SolverTrace).  Steps with decrease ratio below
    accept_ratio are rejected and the radius shrinks by shrink_factor;
    boundary-hitting steps with ratio above grow_ratio double the radius
    up to radius_max.
    """
    config = config or TRConfig()
    geometry = objective.geometry
    trace = SolverTrace()
    t_start = time.perf_counter()
    radius = config.radius0

    x = x0
    f = objective.cost(x)
    grad, cache = objective.grad(x)
    gnorm = geometry.norm(x, grad)
    trace.add(
        iter=0, cost=f, grad_norm=gnorm, step_or_radius=radius,
        time_s=time.perf_counter() - t_start,
    )
    if f <= config.cost_stop or gnorm <= config.grad_norm_stop:
        return x, trace

    for t in range(1, config.max_outer + 1):
        result = tcg_subproblem(
            geometry, x, grad,
            lambda d: objective.hess(x, d, cache),
            radius, config,
        )
        xi = result.step
        predicted = -geometry.metric(x, grad, xi) - 0.5 * geometry.metric(
            x, xi, result.hess_step
        )
        try:
            candidate = geometry.retract(x, xi)
            f_new = objective.cost(candidate)
        except RankDropError:
            candidate, f_new = None, math.inf
        fudge = 1e-15 * abs(f)
        denom = predicted + fudge
        rho = -math.inf if denom <= 0.0 else (f - f_new + fudge) / denom

        if rho >= config.accept_ratio and candidate is not None:
            x, f = candidate, f_new
            grad, cache = objective.grad(x)
            gnorm = geometry.norm(x, grad)
        hit_boundary = result.status in (TCG_BOUNDARY, TCG_NEGATIVE_CURVATURE)
        if rho < config.accept_ratio:
            radius *= config.shrink_factor
        elif rho > config.grow_ratio and hit_boundary:
            radius = min(config.grow_factor * radius, config.radius_max)
        trace.add(
            iter=t, cost=f, grad_norm=gnorm, step_or_radius=radius,
            inner_iters=result.inner_iters, rho=rho,
            time_s=time.perf_counter() - t_start,
        )
        if f <= config.cost_stop or gnorm <= config.grad_norm_stop:
            break
    return x, trace
