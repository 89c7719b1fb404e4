"""Polar-style geometry: W = U B V^T with orthonormal U, V and SPD B.

Rotating all three factors by the same orthogonal Q, (U Q, Q^T B Q, V Q),
leaves W unchanged, so the search space is the quotient of
Stiefel x SPD x Stiefel by O(r).  The vertical space at (U, B, V) is
{(U O, B O - O B, V O) : O skew}.

The metric treats the SPD slot with the affine-invariant inner product
tr(B^{-1} a B^{-1} c), so steps in B are relative to its current scale;
the Stiefel slots carry the embedded Frobenius metric.

``diagonal=True`` restricts the middle factor to positive diagonal
matrices.  The metric and the retraction formulas are unchanged (the
exponential becomes entrywise), but the tangent B-slot and the Riemannian
gradient are diagonal.  This drops the rotational freedom that lets the
SPD factor adapt its eigenbasis and serves as an ablation.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import RankDropError
from ..factors import FactorTuple
from ..manifold import Geometry

_TINY = 1e-300
_ORTH_TOL = 1e-10


def _check_orthonormal(a: np.ndarray, label: str) -> None:
    defect = np.abs(a.T @ a - np.eye(a.shape[1])).max()
    if defect > _ORTH_TOL:
        raise ValueError(f"{label} is not orthonormal: defect {defect:.3e}")


class PolarPoint:
    """Point (U, B, V); eigendata of B is cached for metric and projection."""

    __slots__ = ("U", "B", "V", "b_w", "b_q", "b_inv", "b_sqrt", "b_inv_sqrt")

    def __init__(self, U: np.ndarray, B: np.ndarray, V: np.ndarray):
        U = np.asarray(U, dtype=float)
        B = np.asarray(B, dtype=float)
        V = np.asarray(V, dtype=float)
        r = U.shape[1]
        if B.shape != (r, r) or V.shape[1] != r:
            raise ValueError("inconsistent factor shapes")
        _check_orthonormal(U, "left factor")
        _check_orthonormal(V, "right factor")
        w, q = np.linalg.eigh(kernels.sym_part(B))
        if w[0] <= kernels.RANK_TOL * max(w[-1], 0.0):
            raise RankDropError(
                f"middle factor lost positive definiteness: eigenvalues "
                f"[{w[0]:.3e}, {w[-1]:.3e}]"
            )
        self.U, self.B, self.V = U, B, V
        self.b_w, self.b_q = w, q
        self.b_inv = (q / w) @ q.T
        rt = np.sqrt(w)
        self.b_sqrt = (q * rt) @ q.T
        self.b_inv_sqrt = (q / rt) @ q.T

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[0]

    @property
    def rank(self) -> int:
        return self.U.shape[1]


class PolarGeometry(Geometry):
    """Geometry of the O(r) quotient of Stiefel x SPD x Stiefel."""

    def __init__(self, diagonal: bool = False):
        self.diagonal = diagonal
        self.name = "polar-diagonal" if diagonal else "polar"

    # -- points and tangents --------------------------------------------------

    def point(self, U, B, V) -> PolarPoint:
        return PolarPoint(U, B, V)

    def from_svd_factors(self, u, s, v) -> PolarPoint:
        return PolarPoint(u, np.diag(s), v)

    def pair_factors(self, x: PolarPoint):
        return x.U @ x.B, x.V

    def point_to_arrays(self, x) -> dict[str, np.ndarray]:
        return {"U": x.U, "B": x.B, "V": x.V}

    def point_from_arrays(self, arrays) -> PolarPoint:
        return PolarPoint(arrays["U"], arrays["B"], arrays["V"])

    def zero_tangent(self, x) -> FactorTuple:
        return FactorTuple(
            (np.zeros_like(x.U), np.zeros_like(x.B), np.zeros_like(x.V))
        )

    def random_ambient(self, x, rng) -> FactorTuple:
        b = rng.standard_normal(x.B.shape)
        if self.diagonal:
            b = np.diag(np.diag(b))
        return FactorTuple(
            (rng.standard_normal(x.U.shape), b, rng.standard_normal(x.V.shape))
        )

    # -- metric -----------------------------------------------------------------

    def metric(self, x, xi, eta) -> float:
        mid = np.trace(x.b_inv @ xi[1] @ x.b_inv @ eta[1])
        return float(np.vdot(xi[0], eta[0]) + mid + np.vdot(xi[2], eta[2]))

    # -- projections ---------------------------------------------------------------

    def psi_project(self, x, z) -> FactorTuple:
        sym = kernels.sym_part
        zb = sym(z[1])
        if self.diagonal:
            zb = np.diag(np.diag(zb))
        return FactorTuple(
            (
                z[0] - x.U @ sym(x.U.T @ z[0]),
                zb,
                z[2] - x.V @ sym(x.V.T @ z[2]),
            )
        )

    def pi_project(self, x, eta) -> FactorTuple:
        omega = self._fiber_component(x, eta)
        return FactorTuple(
            (
                eta[0] - x.U @ omega,
                eta[1] - (x.B @ omega - omega @ x.B),
                eta[2] - x.V @ omega,
            )
        )

    def _fiber_component(self, x, eta) -> np.ndarray:
        skew = kernels.skew_part
        rhs = x.B @ (
            skew(x.U.T @ eta[0])
            - 2.0 * skew(x.b_inv @ eta[1])
            + skew(x.V.T @ eta[2])
        ) @ x.B
        # Lyapunov coefficient B^2 shares B's eigenbasis.
        return kernels.lyapunov_from_eigh(x.b_w**2, x.b_q, rhs)

    def horizontality_defect(self, x, xi) -> float:
        tu = xi[0].T @ x.U
        tb = x.b_inv @ xi[1] - xi[1] @ x.b_inv
        tv = xi[2].T @ x.V
        m = tu + tb + tv
        # Each term is skew for tangent input, so horizontality means the sum
        # vanishes outright; normalize by the term sizes (the sum itself is
        # zero in exact arithmetic, useless as a scale).
        num = np.linalg.norm(m - m.T) / 2.0
        den = (
            np.linalg.norm(tu) + np.linalg.norm(tb) + np.linalg.norm(tv) + _TINY
        )
        return float(num / den)

    # -- retraction --------------------------------------------------------------

    def retract(self, x, xi) -> PolarPoint:
        u = x.U if not xi[0].any() else kernels.polar_factor(x.U + xi[0])
        v = x.V if not xi[2].any() else kernels.polar_factor(x.V + xi[2])
        if not xi[1].any():
            b = x.B
        elif self.diagonal:
            d = np.diag(x.B)
            b = np.diag(d * np.exp(np.diag(xi[1]) / d))
        else:
            inner = x.b_inv_sqrt @ xi[1] @ x.b_inv_sqrt
            b = x.b_sqrt @ kernels.sym_expm(inner) @ x.b_sqrt
        return PolarPoint(u, b, v)

    # -- gradient and Hessian ----------------------------------------------------

    def rgrad_from_partials(self, x, partials) -> FactorTuple:
        sym = kernels.sym_part
        phi_u, phi_b, phi_v = partials
        if self.diagonal:
            d = np.diag(x.B)
            grad_b = np.diag(d * np.diag(phi_b) * d)
        else:
            grad_b = x.B @ sym(phi_b) @ x.B
        return FactorTuple(
            (
                phi_u - x.U @ sym(x.U.T @ phi_u),
                grad_b,
                phi_v - x.V @ sym(x.V.T @ phi_v),
            )
        )

    def hess_apply(self, x, xi, partials, dpartials) -> FactorTuple:
        if self.diagonal:
            raise NotImplementedError(
                "second-order steps are not provided for the diagonal ablation"
            )
        sym = kernels.sym_part
        phi_u, phi_b, phi_v = partials
        dphi_u, dphi_b, dphi_v = dpartials
        grad = self.rgrad_from_partials(x, partials)
        # Directional derivative of the gradient field (terms that psi would
        # annihilate are dropped up front).
        dgrad_u = dphi_u - xi[0] @ sym(x.U.T @ phi_u)
        dgrad_b = (
            xi[1] @ sym(phi_b) @ x.B
            + x.B @ sym(dphi_b) @ x.B
            + x.B @ sym(phi_b) @ xi[1]
        )
        dgrad_v = dphi_v - xi[2] @ sym(x.V.T @ phi_v)
        corr_u = -xi[0] @ sym(x.U.T @ grad[0])
        corr_b = -sym(xi[1] @ x.b_inv @ grad[1])
        corr_v = -xi[2] @ sym(x.V.T @ grad[2])
        raw = FactorTuple((dgrad_u + corr_u, dgrad_b + corr_b, dgrad_v + corr_v))
        return self.pi_project(x, self.psi_project(x, raw))

    # -- fiber ----------------------------------------------------------------------

    def vertical_basis(self, x) -> list[FactorTuple]:
        r = x.rank
        basis = []
        for a in range(r):
            for b in range(a + 1, r):
                om = np.zeros((r, r))
                om[a, b] = 1.0
                om[b, a] = -1.0
                basis.append(
                    FactorTuple(
                        (x.U @ om, x.B @ om - om @ x.B, x.V @ om)
                    )
                )
        return basis

    def random_fiber_element(self, r, rng) -> np.ndarray:
        return np.linalg.qr(rng.standard_normal((r, r)))[0]

    def move_along_fiber(self, x, q) -> PolarPoint:
        return PolarPoint(x.U @ q, q.T @ x.B @ q, x.V @ q)

    def transport_tangent(self, x, xi, q) -> FactorTuple:
        return FactorTuple((xi[0] @ q, q.T @ xi[1] @ q, xi[2] @ q))

    # -- linearized search path ------------------------------------------------------

    def path_terms(self, x, xi):
        ub = x.U @ x.B
        lin = x.U @ xi[1] + xi[0] @ x.B
        quad = xi[0] @ xi[1]
        return [
            [(ub, x.V)],
            [(lin, x.V), (ub, xi[2])],
            [(quad, x.V), (lin, xi[2])],
            [(quad, xi[2])],
        ]
