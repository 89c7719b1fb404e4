"""Low-rank matrix completion: cost, derivatives, and initialization.

The cost is the mean squared misfit on the observed set,

    f(x) = (1/m) * sum over observed (i,j) of (W(x)_ij - A_ij)^2,

with W(x) the matrix represented by the factored point x and m the number
of observations.  All derivative quantities live on the observed pattern:
the scaled residual S = (2/m) P(W - A) is the Euclidean gradient of f in
the ambient space, and its directional derivative S* along a tangent
direction drives the Hessian.  Nothing here ever materializes a dense
d1 x d2 matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import svds

from . import kernels
from .errors import (
    ConfigError,
    RankDeficientDataError,
    UndefinedDirectionError,
)
from .factors import FactorTuple, euclidean_norm
from .geometry.embedded import EmbeddedGeometry
from .geometry.fullrank import FullRankGeometry
from .geometry.polar import PolarGeometry
from .geometry.subspace import SubspaceGeometry
from .sampling import SampledMatrix, pair_values


class CompletionProblem:
    """Observed entries of a matrix, a target rank, optional held-out set."""

    def __init__(
        self,
        train: SampledMatrix,
        rank: int,
        test: Optional[SampledMatrix] = None,
    ):
        d1, d2 = train.shape
        if not 1 <= rank <= min(d1, d2):
            raise ConfigError(f"rank {rank} invalid for a {d1}x{d2} problem")
        if test is not None and test.shape != train.shape:
            raise ConfigError("train and test sets describe different shapes")
        self.train = train
        self.test = test
        self.rank = int(rank)

    @property
    def shape(self) -> tuple[int, int]:
        return self.train.shape


@dataclass
class _EvalCache:
    """Residual state shared between a gradient and later Hessian applies."""

    scaled: SampledMatrix
    partials: object
    extras: dict


class CompletionObjective:
    """Mean-squared completion cost over one geometry.

    Implements the protocol the solvers consume: ``cost``, ``grad``
    (returning the Riemannian gradient plus a reusable cache), and ``hess``
    (Riemannian Hessian along a horizontal direction, reusing the cache).
    """

    def __init__(self, problem: CompletionProblem, geometry):
        self.problem = problem
        self.geometry = geometry

    # -- pointwise quantities --------------------------------------------------

    def predicted_values(self, x, sm: Optional[SampledMatrix] = None) -> np.ndarray:
        """W(x) evaluated on the pattern of sm (training set by default)."""
        sm = self.problem.train if sm is None else sm
        rfac, cfac = self.geometry.pair_factors(x)
        return pair_values(rfac, cfac, sm.rows, sm.cols)

    def residual_values(self, x) -> np.ndarray:
        return self.predicted_values(x) - self.problem.train.values

    def cost(self, x) -> float:
        resid = self.residual_values(x)
        return float(np.sum(resid * resid)) / self.problem.train.nnz

    def scaled_residual(self, x) -> SampledMatrix:
        """S = (2/m) (W(x) - A) on the observed set: the ambient gradient."""
        m = self.problem.train.nnz
        return self.problem.train.with_values((2.0 / m) * self.residual_values(x))

    def directional_residual(self, x, xi: FactorTuple) -> SampledMatrix:
        """S* = (2/m) (first-order change of W along xi) on the observed set."""
        train = self.problem.train
        terms = self.geometry.path_terms(x, xi)
        vals = _accumulate_pairs(terms[1], train)
        return train.with_values((2.0 / train.nnz) * vals)

    # -- factor-shaped derivatives ----------------------------------------------

    def euclidean_partials(self, x, s: SampledMatrix):
        """Partial derivatives of the cost with respect to each factor.

        Two sparse-dense products per two-sided factor.  For the embedded
        geometry the ambient gradient operator itself is the partial.
        Returns (partials, extras); extras caches shared products for the
        directional derivative.
        """
        g = self.geometry
        if isinstance(g, FullRankGeometry):
            return FactorTuple((s.mm(x.H), s.tmm(x.G))), {}
        if isinstance(g, PolarGeometry):
            sv = s.mm(x.V)
            stu = s.tmm(x.U)
            parts = FactorTuple((sv @ x.B, x.U.T @ sv, stu @ x.B))
            return parts, {"sv": sv, "stu": stu}
        if isinstance(g, SubspaceGeometry):
            return FactorTuple((s.mm(x.Y), s.tmm(x.U))), {}
        if isinstance(g, EmbeddedGeometry):
            return s, {}
        raise ConfigError(f"no completion partials for geometry {g!r}")

    def directional_partials(self, x, xi, s, sstar, extras):
        """Directional derivative of euclidean_partials along xi."""
        g = self.geometry
        if isinstance(g, FullRankGeometry):
            return FactorTuple(
                (sstar.mm(x.H) + s.mm(xi[1]), sstar.tmm(x.G) + s.tmm(xi[0]))
            )
        if isinstance(g, PolarGeometry):
            sv, stu = extras["sv"], extras["stu"]
            dsv = sstar.mm(x.V) + s.mm(xi[2])
            dstu = sstar.tmm(x.U) + s.tmm(xi[0])
            return FactorTuple(
                (
                    dsv @ x.B + sv @ xi[1],
                    xi[0].T @ sv + x.U.T @ dsv,
                    dstu @ x.B + stu @ xi[1],
                )
            )
        if isinstance(g, SubspaceGeometry):
            return FactorTuple(
                (sstar.mm(x.Y) + s.mm(xi[1]), sstar.tmm(x.U) + s.tmm(xi[0]))
            )
        if isinstance(g, EmbeddedGeometry):
            return sstar
        raise ConfigError(f"no completion partials for geometry {g!r}")

    # -- solver protocol ---------------------------------------------------------

    def grad(self, x):
        s = self.scaled_residual(x)
        partials, extras = self.euclidean_partials(x, s)
        grad = self.geometry.rgrad_from_partials(x, partials)
        return grad, _EvalCache(s, partials, extras)

    def hess(self, x, xi: FactorTuple, cache: _EvalCache) -> FactorTuple:
        sstar = self.directional_residual(x, xi)
        dpartials = self.directional_partials(x, xi, cache.scaled, sstar, cache.extras)
        return self.geometry.hess_apply(x, xi, cache.partials, dpartials)

    # -- reporting ----------------------------------------------------------------

    def test_rmse(self, x) -> float:
        """Root mean squared error on the held-out set (nan if absent)."""
        test = self.problem.test
        if test is None or test.nnz == 0:
            return float("nan")
        diff = self.predicted_values(x, test) - test.values
        return math.sqrt(float(np.sum(diff * diff)) / test.nnz)


def _accumulate_pairs(pairs, sm: SampledMatrix) -> np.ndarray:
    vals = None
    for rfac, cfac in pairs:
        pv = pair_values(rfac, cfac, sm.rows, sm.cols)
        vals = pv if vals is None else vals + pv
    if vals is None:
        vals = np.zeros(sm.nnz)
    return vals


def spectral_init(problem: CompletionProblem, geometry, unbalance: float = 1.0):
    """Start point from the dominant rank-r SVD of the observed matrix.

    The sparse observation matrix (zeros at unobserved positions) is
    factored with a deterministic start vector, the singular triplets are
    sign-fixed and sorted descending, and the result is repackaged into
    the geometry's factors.

    unbalance != 1 moves the point along its fiber, multiplying the norm
    ratio of the second factor to the first by that value while leaving
    the represented matrix unchanged (the spectral point starts balanced).
    Only the two-factor general-linear fiber supports this; other
    geometries raise ConfigError.
    """
    train = problem.train
    r = problem.rank
    d1, d2 = train.shape
    if train.nnz == 0 or not np.any(train.values):
        raise RankDeficientDataError("observed matrix is zero")
    if min(d1, d2) <= max(2 * r + 2, 16):
        # svds needs k strictly inside the spectrum; small problems go dense.
        u, sig, vt = np.linalg.svd(train.to_dense(), full_matrices=False)
        u, sig, vt = u[:, :r], sig[:r], vt[:r]
    else:
        v0 = np.random.default_rng(0).standard_normal(min(d1, d2))
        u, sig, vt = svds(train.to_scipy(), k=r, v0=v0)
        order = np.argsort(sig)[::-1]
        u, sig, vt = u[:, order], sig[order], vt[order]
    if sig[-1] <= kernels.RANK_TOL * max(sig[0], np.finfo(float).tiny):
        raise RankDeficientDataError(
            f"observed matrix has numerical rank below {r}"
        )
    u, vt = kernels.svd_fix_signs(u, vt)
    x = geometry.from_svd_factors(u, sig, vt.T)
    if unbalance != 1.0:
        if unbalance <= 0.0:
            raise ConfigError("unbalance factor must be positive")
        if not isinstance(geometry, FullRankGeometry):
            raise ConfigError(
                "factor rebalancing needs the general-linear fiber; "
                f"{geometry.name} has none"
            )
        x = geometry.move_along_fiber(x, math.sqrt(unbalance) * np.eye(r))
    return x


def linearized_step(objective: CompletionObjective, x, xi: FactorTuple) -> float:
    """Exact minimizer of the cost along the straight factor path x + s*xi.

    The observed-entry residual along the path is polynomial in s (degree
    up to three), so the cost is a polynomial of degree up to six whose
    coefficients are assembled from inner products of the per-power entry
    vectors over the observed set.  The minimizer over the forward ray
    s >= 0 is returned, floored at 1e-16: a step seed must point along
    the given direction even when the polynomial has a deeper basin at
    negative s.  The direction is used exactly as given: callers
    minimizing along a descent step pass the step itself, not its negative.
    """
    if euclidean_norm(xi) == 0.0:
        raise UndefinedDirectionError("zero direction has no step size")
    train = objective.problem.train
    terms = objective.geometry.path_terms(x, xi)
    evals = [_accumulate_pairs(pairs, train) for pairs in terms]
    evals[0] = evals[0] - train.values
    # Whole-vector trim: drop vanishing top powers so the assembled
    # polynomial keeps an exactly even, nonnegative leading coefficient.
    norms = [float(np.linalg.norm(e)) for e in evals]
    nscale = max(norms)
    deg = 0
    for k, nk in enumerate(norms):
        if nk > 1e-14 * nscale:
            deg = k
    if deg == 0:
        raise UndefinedDirectionError(
            "direction does not change the observed entries"
        )
    coeffs = np.zeros(2 * deg + 1)
    for a in range(deg + 1):
        coeffs[2 * a] += float(np.dot(evals[a], evals[a]))
        for b in range(a + 1, deg + 1):
            coeffs[a + b] += 2.0 * float(np.dot(evals[a], evals[b]))
    coeffs /= train.nnz
    s, _ = kernels.minimize_polynomial(coeffs, lower=0.0)
    return max(float(s), 1e-16)


def tr_radius_seed(s0: float, grad: FactorTuple, geometry, x) -> tuple[float, float]:
    """Initial and maximal trust-region radius from the linearized step.

    delta0 = (s0 / 4^3) * ||grad||_g and the cap is 2^10 * delta0.
    """
    gnorm = geometry.norm(x, grad)
    if gnorm == 0.0:
        raise UndefinedDirectionError("zero gradient gives no radius scale")
    delta0 = (s0 / 64.0) * gnorm
    return delta0, 1024.0 * delta0
