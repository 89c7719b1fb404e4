"""Embedded geometry: rank-r matrices as a submanifold of the matrix space.

A point is stored in SVD form W = U diag(s) V^T.  Tangent vectors are kept
factored as (N, U_p, V_p), representing

    Z = U N V^T + U_p V^T + U V_p^T,    U^T U_p = 0,  V^T V_p = 0,

and the metric is the ambient Frobenius inner product, which in factored
form is the sum of the slotwise inner products.  The fiber is trivial, so
the horizontal projection is the identity on tangent vectors.

Ambient matrices enter only as operators supporting products with thin
factors (``mm`` for Z @ X and ``tmm`` for Z.T @ X), so nothing here ever
materializes a d1 x d2 array; the retraction in particular works on
(d1 + d2) x 2r factors plus a 2r x 2r core.
"""

from __future__ import annotations

import numpy as np

from .. import kernels, opcount
from ..errors import RankDropError
from ..factors import FactorTuple
from ..manifold import Geometry

_TINY = 1e-300
_ORTH_TOL = 1e-10


class DenseAmbient:
    """Adapter giving a dense matrix the ambient-operator interface."""

    def __init__(self, a: np.ndarray):
        self.a = np.asarray(a, dtype=float)

    @property
    def shape(self):
        return self.a.shape

    def mm(self, x: np.ndarray) -> np.ndarray:
        return self.a @ x

    def tmm(self, x: np.ndarray) -> np.ndarray:
        return self.a.T @ x


class EmbeddedPoint:
    """Point (U, s, V) with strictly positive descending singular values."""

    __slots__ = ("U", "s", "V")

    def __init__(self, U: np.ndarray, s: np.ndarray, V: np.ndarray):
        U = np.asarray(U, dtype=float)
        s = np.asarray(s, dtype=float)
        V = np.asarray(V, dtype=float)
        if s.ndim != 1 or U.shape[1] != s.size or V.shape[1] != s.size:
            raise ValueError("inconsistent factor shapes")
        for a, label in ((U, "left"), (V, "right")):
            defect = np.abs(a.T @ a - np.eye(a.shape[1])).max()
            if defect > _ORTH_TOL:
                raise ValueError(f"{label} factor is not orthonormal: defect {defect:.3e}")
        if np.any(np.diff(s) > 0):
            raise ValueError("singular values must be nonincreasing")
        if s[-1] <= kernels.RANK_TOL * s[0]:
            raise RankDropError(
                f"singular values span [{s[-1]:.3e}, {s[0]:.3e}]: rank deficient"
            )
        self.U, self.s, self.V = U, s, V

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[0]

    @property
    def rank(self) -> int:
        return self.s.size


class EmbeddedGeometry(Geometry):
    """Fixed-rank submanifold geometry with factored tangent vectors."""

    name = "embedded"

    # -- points and tangents -----------------------------------------------------

    def point(self, U, s, V) -> EmbeddedPoint:
        return EmbeddedPoint(U, s, V)

    def from_svd_factors(self, u, s, v) -> EmbeddedPoint:
        return EmbeddedPoint(u, s, v)

    def pair_factors(self, x: EmbeddedPoint):
        return x.U * x.s, x.V

    def point_to_arrays(self, x) -> dict[str, np.ndarray]:
        return {"U": x.U, "s": x.s, "V": x.V}

    def point_from_arrays(self, arrays) -> EmbeddedPoint:
        return EmbeddedPoint(arrays["U"], arrays["s"], arrays["V"])

    def zero_tangent(self, x) -> FactorTuple:
        r = x.rank
        return FactorTuple(
            (np.zeros((r, r)), np.zeros_like(x.U), np.zeros_like(x.V))
        )

    def random_ambient(self, x, rng) -> FactorTuple:
        r = x.rank
        return FactorTuple(
            (
                rng.standard_normal((r, r)),
                rng.standard_normal(x.U.shape),
                rng.standard_normal(x.V.shape),
            )
        )

    # -- metric ---------------------------------------------------------------------

    def metric(self, x, xi, eta) -> float:
        return float(
            np.vdot(xi[0], eta[0]) + np.vdot(xi[1], eta[1]) + np.vdot(xi[2], eta[2])
        )

    # -- projections -------------------------------------------------------------------

    def psi_project(self, x, z) -> FactorTuple:
        # Enforce the orthogonality constraints on the factored slots.
        return FactorTuple(
            (
                z[0],
                z[1] - x.U @ (x.U.T @ z[1]),
                z[2] - x.V @ (x.V.T @ z[2]),
            )
        )

    def pi_project(self, x, eta) -> FactorTuple:
        return FactorTuple(eta)

    def project_ambient(self, x, z_op) -> FactorTuple:
        """Orthogonal projection of an ambient operator onto the tangent space."""
        zv = z_op.mm(x.V)
        ztu = z_op.tmm(x.U)
        n = x.U.T @ zv
        return FactorTuple((n, zv - x.U @ n, ztu - x.V @ n.T))

    def horizontality_defect(self, x, xi) -> float:
        a = x.U.T @ xi[1]
        b = x.V.T @ xi[2]
        num = np.linalg.norm(a) + np.linalg.norm(b)
        den = np.linalg.norm(xi[1]) + np.linalg.norm(xi[2]) + _TINY
        return float(num / den)

    # -- retraction -----------------------------------------------------------------------

    def retract(self, x, xi) -> EmbeddedPoint:
        """Metric projection of W + xi back onto the rank-r set.

        Computed from QR factorizations of the factored slots and an SVD of
        a 2r x 2r core; the ambient matrix is never formed.
        """
        if not any(a.any() for a in xi):
            return x
        r = x.rank
        qu, ru = np.linalg.qr(xi[1])
        qv, rv = np.linalg.qr(xi[2])
        opcount.note_dense(*qu.shape)
        opcount.note_dense(*qv.shape)
        d1, d2 = x.shape
        opcount.add_flops(4 * (d1 + d2) * r * r)
        core = np.zeros((2 * r, 2 * r))
        core[:r, :r] = np.diag(x.s) + xi[0]
        core[:r, r:] = rv.T
        core[r:, :r] = ru
        pu, sigma, qvt = kernels.thin_svd(core)
        if sigma[r - 1] <= kernels.RANK_TOL * sigma[0]:
            raise RankDropError(
                f"retraction lost rank: core singular values span "
                f"[{sigma[r - 1]:.3e}, {sigma[0]:.3e}]"
            )
        left = np.hstack([x.U, qu])
        right = np.hstack([x.V, qv])
        opcount.note_dense(*left.shape)
        opcount.note_dense(*right.shape)
        u_new = left @ pu[:, :r]
        v_new = right @ qvt[:r, :].T
        opcount.add_flops(4 * (d1 + d2) * r * r)
        # Guard orthonormality against drift accumulated over many steps.
        u_new, v_new = _reorthonormalize(u_new), _reorthonormalize(v_new)
        return EmbeddedPoint(u_new, sigma[:r], v_new)

    # -- gradient and Hessian ---------------------------------------------------------------

    def rgrad_from_partials(self, x, partials) -> FactorTuple:
        # partials: ambient-gradient operator.
        return self.project_ambient(x, partials)

    def hess_apply(self, x, xi, partials, dpartials) -> FactorTuple:
        """Tangent projection of the derivative of the projected-gradient field.

        partials is the ambient gradient operator S at x and dpartials its
        directional derivative along xi.  The variation of the singular
        subspaces contributes the curvature terms with the inverse singular
        values.
        """
        s_op, sstar_op = partials, dpartials
        sv = sstar_op.mm(x.V)
        stu = sstar_op.tmm(x.U)
        n = x.U.T @ sv
        t1 = sv + s_op.mm(xi[2]) / x.s
        t2 = stu + s_op.tmm(xi[1]) / x.s
        return FactorTuple(
            (n, t1 - x.U @ (x.U.T @ t1), t2 - x.V @ (x.V.T @ t2))
        )

    # -- linearized search path ----------------------------------------------------------------

    def path_terms(self, x, xi):
        return [
            [(x.U * x.s, x.V)],
            [(x.U @ xi[0] + xi[1], x.V), (x.U, xi[2])],
        ]


def _reorthonormalize(a: np.ndarray) -> np.ndarray:
    q, rfac = np.linalg.qr(a)
    # qr can flip column signs; undo so the retraction stays deterministic
    # and close to the SVD factors it came from.
    signs = np.sign(np.diag(rfac))
    signs[signs == 0] = 1.0
    return q * signs
