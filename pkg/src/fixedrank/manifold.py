"""Geometry contract and derivative diagnostics.

A Geometry bundles everything a Riemannian solver needs to run on one of
the fixed-rank matrix factorizations: the metric, tangent and horizontal
projections, a retraction, and the maps that turn Euclidean partial
derivatives of a cost into Riemannian gradients and Hessian actions.

Quotient geometries additionally expose their vertical space (the
directions along the fiber of factorizations representing the same matrix)
so tests can verify that horizontal projections kill exactly those
directions.  The embedded geometry has a trivial fiber; its pi_project is
the identity on tangent vectors.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .factors import FactorTuple

DEFAULT_CHECK_STEPS = np.logspace(-6.0, -2.0, 6)

# The cubic remainder of the Hessian model is only visible between the
# floating-point floor and the quartic bend, so its check samples a wider
# step range and fits locally.
HESSIAN_CHECK_STEPS = np.logspace(-6.0, -1.0, 11)

# Taylor residuals below this absolute floor (scaled by 1 + |cost|) sit in
# floating-point noise and are excluded from slope fits.
RESIDUAL_FLOOR = 1e-14


class Geometry(abc.ABC):
    """Contract shared by all fixed-rank geometries."""

    name: str = "geometry"

    # --- vector-space plumbing ------------------------------------------

    @abc.abstractmethod
    def zero_tangent(self, x) -> FactorTuple:
        """All-zero tangent at x."""

    @abc.abstractmethod
    def random_ambient(self, x, rng: np.random.Generator) -> FactorTuple:
        """Standard-normal factor-shaped perturbation (not tangent yet)."""

    # --- metric ----------------------------------------------------------

    @abc.abstractmethod
    def metric(self, x, xi: FactorTuple, eta: FactorTuple) -> float:
        """Riemannian inner product of two tangent vectors at x."""

    def norm(self, x, xi: FactorTuple) -> float:
        return float(np.sqrt(max(self.metric(x, xi, xi), 0.0)))

    # --- projections -----------------------------------------------------

    @abc.abstractmethod
    def psi_project(self, x, z: FactorTuple) -> FactorTuple:
        """Project a factor-shaped ambient perturbation onto the tangent
        space of the total space at x."""

    @abc.abstractmethod
    def pi_project(self, x, eta: FactorTuple) -> FactorTuple:
        """Project a tangent vector onto the horizontal space at x
        (metric-orthogonal complement of the vertical space)."""

    def project(self, x, z: FactorTuple) -> FactorTuple:
        """Ambient perturbation to horizontal vector: pi after psi."""
        return self.pi_project(x, self.psi_project(x, z))

    def random_horizontal(self, x, rng: np.random.Generator) -> FactorTuple:
        """Unit-norm horizontal vector from a Gaussian ambient draw."""
        h = self.project(x, self.random_ambient(x, rng))
        n = self.norm(x, h)
        if n == 0.0:
            raise ValueError("degenerate random horizontal draw")
        return (1.0 / n) * h

    # --- retraction ------------------------------------------------------

    @abc.abstractmethod
    def retract(self, x, xi: FactorTuple):
        """First-order retraction of tangent xi at x; returns a new point.

        Raises RankDropError when the stepped factors lose rank."""

    # --- cost plumbing ---------------------------------------------------

    @abc.abstractmethod
    def rgrad_from_partials(self, x, partials) -> FactorTuple:
        """Riemannian gradient from Euclidean partial derivatives."""

    @abc.abstractmethod
    def hess_apply(self, x, xi: FactorTuple, partials, dpartials) -> FactorTuple:
        """Riemannian Hessian action on horizontal xi.

        ``partials`` are the Euclidean partials at x and ``dpartials`` their
        directional derivative along xi (both supplied by the cost module).
        Assembles the directional derivative of the gradient field by the
        product rule, adds the connection correction, then projects with
        psi and pi."""

    # --- quotient structure (tests and diagnostics) ----------------------

    def horizontality_defect(self, x, xi: FactorTuple) -> float:
        """Residual of the horizontal-space condition; 0 for trivial fibers."""
        return 0.0

    def vertical_basis(self, x) -> list[FactorTuple]:
        """Spanning set of the vertical space at x (empty if trivial)."""
        return []

    def random_fiber_element(self, r: int, rng: np.random.Generator):
        """Random element of the fiber group, or None for a trivial fiber."""
        return None

    def move_along_fiber(self, x, q):
        raise NotImplementedError(f"{self.name} has a trivial fiber")

    def transport_tangent(self, x, xi: FactorTuple, q) -> FactorTuple:
        raise NotImplementedError(f"{self.name} has a trivial fiber")


# --------------------------------------------------------------------------
# Derivative checks
# --------------------------------------------------------------------------


def fit_loglog_slope(
    ts: np.ndarray, residuals: np.ndarray, floor: float
) -> tuple[float, np.ndarray]:
    """Least-squares slope of log residual against log step.

    Points whose residual sits at or below ``floor`` are excluded: they are
    dominated by floating-point noise, not by the Taylor remainder.  Returns
    (slope, mask_of_used_points); the slope is nan when fewer than two
    points survive (which itself signals residuals at machine precision).
    """
    ts = np.asarray(ts, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    mask = residuals > floor
    if mask.sum() < 2:
        return float("nan"), mask
    slope = np.polyfit(np.log(ts[mask]), np.log(residuals[mask]), 1)[0]
    return float(slope), mask


def fit_best_window_slope(
    ts: np.ndarray, residuals: np.ndarray, floor: float, window: int = 3
) -> tuple[float, np.ndarray]:
    """Steepest log-log slope over consecutive above-floor points.

    A power-law regime usually occupies only part of the sampled step
    range: below it the residual sits at the floating-point floor, above
    it the next Taylor order bends the curve.  Fitting every length-
    ``window`` run of surviving points and keeping the steepest slope
    measures the decay rate inside the clean regime.  Falls back to a
    single fit when fewer than ``window`` points survive; nan with fewer
    than two.
    """
    ts = np.asarray(ts, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    mask = residuals > floor
    lt = np.log(ts[mask])
    lr = np.log(residuals[mask])
    if lt.size < 2:
        return float("nan"), mask
    if lt.size < window:
        return float(np.polyfit(lt, lr, 1)[0]), mask
    best = -np.inf
    for i in range(lt.size - window + 1):
        best = max(best, float(np.polyfit(lt[i : i + window], lr[i : i + window], 1)[0]))
    return best, mask


@dataclass
class GradientCheckReport:
    geometry: str
    slope: float
    steps: list[float]
    residuals: list[float]
    used: list[bool]
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "geometry": self.geometry,
            "slope": self.slope,
            "steps": self.steps,
            "residuals": self.residuals,
            "used": self.used,
            "passed": self.passed,
        }


@dataclass
class HessianCheckReport:
    geometry: str
    slope: float
    symmetry_defect: float
    steps: list[float]
    residuals: list[float]
    used: list[bool]
    slope_passed: bool
    symmetry_passed: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.slope_passed and self.symmetry_passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "geometry": self.geometry,
            "slope": self.slope,
            "symmetry_defect": self.symmetry_defect,
            "steps": self.steps,
            "residuals": self.residuals,
            "used": self.used,
            "slope_passed": self.slope_passed,
            "symmetry_passed": self.symmetry_passed,
            "passed": self.passed,
        }


def check_gradient(
    objective,
    x,
    rng: np.random.Generator,
    steps: np.ndarray | None = None,
    direction: FactorTuple | None = None,
) -> GradientCheckReport:
    """First-order Taylor test of the Riemannian gradient.

    Along a unit horizontal direction xi, cost(R(t xi)) - cost(x) -
    t <grad, xi> must shrink like t^2.  A slope within [1.9, 2.1] passes;
    residuals entirely at the floating-point floor also pass (the expansion
    is exact to machine precision).
    """
    geom = objective.geometry
    ts = DEFAULT_CHECK_STEPS if steps is None else np.asarray(steps, dtype=float)
    xi = geom.random_horizontal(x, rng) if direction is None else direction
    f0 = objective.cost(x)
    grad, _ = objective.grad(x)
    slope_term = geom.metric(x, grad, xi)
    res = np.empty_like(ts)
    for k, t in enumerate(ts):
        res[k] = abs(objective.cost(geom.retract(x, float(t) * xi)) - f0 - t * slope_term)
    floor = RESIDUAL_FLOOR * (1.0 + abs(f0))
    slope, mask = fit_loglog_slope(ts, res, floor)
    exact = not mask.any()
    passed = exact or (np.isfinite(slope) and 1.9 <= slope <= 2.1)
    return GradientCheckReport(
        geometry=geom.name,
        slope=slope,
        steps=list(map(float, ts)),
        residuals=list(map(float, res)),
        used=list(map(bool, mask)),
        passed=bool(passed),
    )


def check_hessian(
    objective,
    x,
    rng: np.random.Generator,
    steps: np.ndarray | None = None,
    n_symmetry_pairs: int = 10,
) -> HessianCheckReport:
    """Second-order Taylor test plus Hessian symmetry test.

    Symmetry: g(H xi, eta) = g(xi, H eta) over random horizontal pairs,
    reported as the worst relative defect.  Taylor: the second-order
    remainder along a unit horizontal direction must shrink with slope
    at least 2.9 in its clean regime (best-window fit); the slope
    criterion is only meaningful where the gradient vanishes or the
    retraction is second order, so callers should evaluate it at
    converged points.
    """
    geom = objective.geometry
    ts = HESSIAN_CHECK_STEPS if steps is None else np.asarray(steps, dtype=float)
    f0 = objective.cost(x)
    grad, aux = objective.grad(x)

    worst = 0.0
    for _ in range(n_symmetry_pairs):
        xi = geom.random_horizontal(x, rng)
        eta = geom.random_horizontal(x, rng)
        hxi = objective.hess(x, xi, aux)
        heta = objective.hess(x, eta, aux)
        lhs = geom.metric(x, hxi, eta)
        rhs = geom.metric(x, heta, xi)
        scale = (
            geom.norm(x, hxi) * geom.norm(x, eta)
            + geom.norm(x, heta) * geom.norm(x, xi)
            + 1e-300
        )
        worst = max(worst, abs(lhs - rhs) / scale)

    xi = geom.random_horizontal(x, rng)
    hxi = objective.hess(x, xi, aux)
    slope_term = geom.metric(x, grad, xi)
    quad_term = 0.5 * geom.metric(x, hxi, xi)
    res = np.empty_like(ts)
    for k, t in enumerate(ts):
        ft = objective.cost(geom.retract(x, float(t) * xi))
        res[k] = abs(ft - f0 - t * slope_term - t * t * quad_term)
    floor = RESIDUAL_FLOOR * (1.0 + abs(f0))
    slope, mask = fit_best_window_slope(ts, res, floor)
    exact = not mask.any()
    slope_passed = exact or (np.isfinite(slope) and slope >= 2.9)
    symmetry_passed = worst <= 1e-8
    return HessianCheckReport(
        geometry=geom.name,
        slope=slope,
        symmetry_defect=float(worst),
        steps=list(map(float, ts)),
        residuals=list(map(float, res)),
        used=list(map(bool, mask)),
        slope_passed=bool(slope_passed),
        symmetry_passed=bool(symmetry_passed),
    )
