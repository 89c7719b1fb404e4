"""Subspace-coordinates geometry: W = U Y^T with orthonormal U.

The pair (U Q, Y Q) for orthogonal Q describes the same W, so the search
space is Stiefel x (full-rank coordinates) quotiented by O(r).  The
vertical space at (U, Y) is {(U O, Y O) : O skew}.

The default metric weights the coordinate slot by (Y^T Y)^{-1},

    g((a, b), (c, d)) = tr(a^T c) + tr((Y^T Y)^{-1} b^T d),

which compensates for all of W's scale living in Y (the orthonormal factor
has unit columns regardless of the data).  ``scale_invariant=False``
selects the plain Euclidean metric on Y as an ablation; its gradient steps
inherit the raw conditioning of Y^T Y.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import RankDropError
from ..factors import FactorTuple
from ..manifold import Geometry

_TINY = 1e-300
_ORTH_TOL = 1e-10


class SubspacePoint:
    """Point (U, Y) with cached coordinate Gram data."""

    __slots__ = ("U", "Y", "Q", "q_w", "q_q", "q_inv")

    def __init__(self, U: np.ndarray, Y: np.ndarray):
        U = np.asarray(U, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if U.ndim != 2 or Y.ndim != 2 or U.shape[1] != Y.shape[1]:
            raise ValueError("factors must be d1 x r and d2 x r")
        defect = np.abs(U.T @ U - np.eye(U.shape[1])).max()
        if defect > _ORTH_TOL:
            raise ValueError(f"left factor is not orthonormal: defect {defect:.3e}")
        r = Y.shape[1]
        if r <= 16:
            s = np.linalg.svd(Y, compute_uv=False)
            if s[-1] <= kernels.RANK_TOL * s[0]:
                raise RankDropError(
                    f"coordinate factor lost rank: singular values "
                    f"[{s[-1]:.3e}, {s[0]:.3e}]"
                )
        self.U, self.Y = U, Y
        self.Q = Y.T @ Y
        self.q_w, self.q_q = kernels.eigh_spd(self.Q, "coordinate Gram matrix")
        self.q_inv = (self.q_q / self.q_w) @ self.q_q.T

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.Y.shape[0]

    @property
    def rank(self) -> int:
        return self.U.shape[1]


class SubspaceGeometry(Geometry):
    """Geometry of the O(r) quotient of Stiefel x coordinates."""

    def __init__(self, scale_invariant: bool = True):
        self.scale_invariant = scale_invariant
        self.name = "subspace" if scale_invariant else "subspace-euclidean"

    # -- points and tangents ---------------------------------------------------

    def point(self, U, Y) -> SubspacePoint:
        return SubspacePoint(U, Y)

    def from_svd_factors(self, u, s, v) -> SubspacePoint:
        return SubspacePoint(u, v * s)

    def pair_factors(self, x: SubspacePoint):
        return x.U, x.Y

    def point_to_arrays(self, x) -> dict[str, np.ndarray]:
        return {"U": x.U, "Y": x.Y}

    def point_from_arrays(self, arrays) -> SubspacePoint:
        return SubspacePoint(arrays["U"], arrays["Y"])

    def zero_tangent(self, x) -> FactorTuple:
        return FactorTuple((np.zeros_like(x.U), np.zeros_like(x.Y)))

    def random_ambient(self, x, rng) -> FactorTuple:
        return FactorTuple(
            (rng.standard_normal(x.U.shape), rng.standard_normal(x.Y.shape))
        )

    # -- metric -------------------------------------------------------------------

    def metric(self, x, xi, eta) -> float:
        if self.scale_invariant:
            coord = np.trace(x.q_inv @ (xi[1].T @ eta[1]))
        else:
            coord = np.vdot(xi[1], eta[1])
        return float(np.vdot(xi[0], eta[0]) + coord)

    # -- projections ------------------------------------------------------------------

    def psi_project(self, x, z) -> FactorTuple:
        sym = kernels.sym_part
        return FactorTuple((z[0] - x.U @ sym(x.U.T @ z[0]), z[1]))

    def pi_project(self, x, eta) -> FactorTuple:
        omega = self._fiber_component(x, eta)
        return FactorTuple((eta[0] - x.U @ omega, eta[1] - x.Y @ omega))

    def _fiber_component(self, x, eta) -> np.ndarray:
        skew = kernels.skew_part
        if self.scale_invariant:
            # Two nested Lyapunov solves in the coordinate Gram matrix.
            rhs = 2.0 * skew(x.Q @ (x.U.T @ eta[0]) @ x.Q) - 2.0 * skew(
                (eta[1].T @ x.Y) @ x.Q
            )
            inner = kernels.lyapunov_from_eigh(x.q_w, x.q_q, rhs)
            return kernels.lyapunov_from_eigh(x.q_w, x.q_q, inner)
        # Euclidean orthogonality to the verticals (U O, Y O): the U slot
        # contributes identity weight, hence the shifted coefficient.
        rhs = 2.0 * skew(x.U.T @ eta[0] + x.Y.T @ eta[1])
        return kernels.lyapunov_from_eigh(x.q_w + 1.0, x.q_q, rhs)

    def horizontality_defect(self, x, xi) -> float:
        if self.scale_invariant:
            m = xi[0].T @ x.U + x.q_inv @ (xi[1].T @ x.Y)
        else:
            m = x.U.T @ xi[0] + x.Y.T @ xi[1]
        num = np.linalg.norm(m - m.T)
        return float(num / (2.0 * np.linalg.norm(m) + _TINY))

    # -- retraction ---------------------------------------------------------------------

    def retract(self, x, xi) -> SubspacePoint:
        u = x.U if not xi[0].any() else kernels.polar_factor(x.U + xi[0])
        return SubspacePoint(u, x.Y + xi[1])

    # -- gradient and Hessian ---------------------------------------------------------

    def rgrad_from_partials(self, x, partials) -> FactorTuple:
        sym = kernels.sym_part
        phi_u, phi_y = partials
        grad_u = phi_u - x.U @ sym(x.U.T @ phi_u)
        if self.scale_invariant:
            return FactorTuple((grad_u, phi_y @ x.Q))
        return FactorTuple((grad_u, phi_y))

    def hess_apply(self, x, xi, partials, dpartials) -> FactorTuple:
        sym = kernels.sym_part
        phi_u, phi_y = partials
        dphi_u, dphi_y = dpartials
        dgrad_u = dphi_u - xi[0] @ sym(x.U.T @ phi_u)
        if not self.scale_invariant:
            raw = FactorTuple((dgrad_u, dphi_y))
            return self.pi_project(x, self.psi_project(x, raw))
        grad_y = phi_y @ x.Q
        dgrad_y = dphi_y @ x.Q + phi_y @ (xi[1].T @ x.Y + x.Y.T @ xi[1])
        grad_u = phi_u - x.U @ sym(x.U.T @ phi_u)
        corr_u = -xi[0] @ sym(x.U.T @ grad_u)
        corr_y = (
            -grad_y @ x.q_inv @ sym(x.Y.T @ xi[1])
            - xi[1] @ x.q_inv @ sym(x.Y.T @ grad_y)
            + x.Y @ x.q_inv @ sym(grad_y.T @ xi[1])
        )
        raw = FactorTuple((dgrad_u + corr_u, dgrad_y + corr_y))
        return self.pi_project(x, self.psi_project(x, raw))

    # -- fiber --------------------------------------------------------------------------

    def vertical_basis(self, x) -> list[FactorTuple]:
        r = x.rank
        basis = []
        for a in range(r):
            for b in range(a + 1, r):
                om = np.zeros((r, r))
                om[a, b] = 1.0
                om[b, a] = -1.0
                basis.append(FactorTuple((x.U @ om, x.Y @ om)))
        return basis

    def random_fiber_element(self, r, rng) -> np.ndarray:
        return np.linalg.qr(rng.standard_normal((r, r)))[0]

    def move_along_fiber(self, x, q) -> SubspacePoint:
        return SubspacePoint(x.U @ q, x.Y @ q)

    def transport_tangent(self, x, xi, q) -> FactorTuple:
        return FactorTuple((xi[0] @ q, xi[1] @ q))

    # -- linearized search path ------------------------------------------------------------

    def path_terms(self, x, xi):
        return [
            [(x.U, x.Y)],
            [(x.U, xi[1]), (xi[0], x.Y)],
            [(xi[0], xi[1])],
        ]
