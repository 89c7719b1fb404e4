"""Two-factor full-rank geometry: W = G H^T, G and H full column rank.

Factorizations (G M^{-1}, H M^T) for invertible M describe the same W, so
the search space is the product of two full-rank factor spaces quotiented
by GL(r).  The vertical space at (G, H) is {(-G L, H L^T)}.

Two metrics are supported.  The scale-invariant one,

    g((a, b), (c, d)) = tr((G^T G)^{-1} a^T c) + tr((H^T H)^{-1} b^T d),

is invariant along the fiber, which makes gradient directions independent
of how mass is balanced between the factors.  The plain Euclidean metric
(``scale_invariant=False``) is the classical alternative kept here as an
ablation; it is not fiber-invariant and degrades under unbalanced factors.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import RankDropError
from ..factors import FactorTuple
from ..manifold import Geometry

_TINY = 1e-300


def _check_full_rank(a: np.ndarray, label: str) -> None:
    """Relative rank test; thin SVD for small ranks, Gram Cholesky above."""
    r = a.shape[1]
    if r <= 16:
        s = np.linalg.svd(a, compute_uv=False)
        if s[-1] <= kernels.RANK_TOL * s[0]:
            raise RankDropError(
                f"{label} lost rank: singular values [{s[-1]:.3e}, {s[0]:.3e}]"
            )
    else:
        gram = a.T @ a
        try:
            np.linalg.cholesky(gram / max(np.trace(gram), _TINY))
        except np.linalg.LinAlgError:
            raise RankDropError(f"{label} lost rank: Gram factorization failed") from None


class FullRankPoint:
    """Point (G, H) with cached Gram data.

    The caches (Gram matrices, their inverses, square roots, and the spectral
    data of the transformed horizontal-projection coefficient) are computed
    once so that repeated metric and projection calls at the same point cost
    O(r^3) dense work only.
    """

    __slots__ = (
        "G", "H", "P", "Q", "p_inv", "q_inv",
        "p_sqrt", "p_inv_sqrt", "_lyap_w", "_lyap_q",
        "_wp", "_qp", "_wq", "_qq",
    )

    def __init__(self, G: np.ndarray, H: np.ndarray):
        G = np.asarray(G, dtype=float)
        H = np.asarray(H, dtype=float)
        if G.ndim != 2 or H.ndim != 2 or G.shape[1] != H.shape[1]:
            raise ValueError("factors must be d1 x r and d2 x r")
        _check_full_rank(G, "left factor")
        _check_full_rank(H, "right factor")
        self.G, self.H = G, H
        self.P = G.T @ G
        self.Q = H.T @ H
        self._wp, self._qp = kernels.eigh_spd(self.P, "left Gram matrix")
        self._wq, self._qq = kernels.eigh_spd(self.Q, "right Gram matrix")
        self.p_inv = (self._qp / self._wp) @ self._qp.T
        self.q_inv = (self._qq / self._wq) @ self._qq.T
        rt = np.sqrt(self._wp)
        self.p_sqrt = (self._qp * rt) @ self._qp.T
        self.p_inv_sqrt = (self._qp / rt) @ self._qp.T
        # Coefficient of the horizontal-projection equation, symmetrized:
        # X (PQ) + (PQ) X = C becomes a Lyapunov equation in M = P^.5 Q P^.5.
        m = self.p_sqrt @ self.Q @ self.p_sqrt
        self._lyap_w, self._lyap_q = kernels.eigh_spd(m, "projection coefficient")

    @property
    def shape(self) -> tuple[int, int]:
        return self.G.shape[0], self.H.shape[0]

    @property
    def rank(self) -> int:
        return self.G.shape[1]


class FullRankGeometry(Geometry):
    """Geometry of the GL(r) quotient of two full-rank factors."""

    def __init__(self, scale_invariant: bool = True):
        self.scale_invariant = scale_invariant
        self.name = "fullrank" if scale_invariant else "fullrank-euclidean"

    # -- points and tangents ------------------------------------------------

    def point(self, G, H) -> FullRankPoint:
        return FullRankPoint(G, H)

    def from_svd_factors(self, u, s, v) -> FullRankPoint:
        rt = np.sqrt(s)
        return FullRankPoint(u * rt, v * rt)

    def pair_factors(self, x: FullRankPoint):
        return x.G, x.H

    def point_to_arrays(self, x: FullRankPoint) -> dict[str, np.ndarray]:
        return {"G": x.G, "H": x.H}

    def point_from_arrays(self, arrays) -> FullRankPoint:
        return FullRankPoint(arrays["G"], arrays["H"])

    def zero_tangent(self, x) -> FactorTuple:
        return FactorTuple((np.zeros_like(x.G), np.zeros_like(x.H)))

    def random_ambient(self, x, rng) -> FactorTuple:
        return FactorTuple(
            (rng.standard_normal(x.G.shape), rng.standard_normal(x.H.shape))
        )

    # -- metric ---------------------------------------------------------------

    def metric(self, x, xi, eta) -> float:
        if self.scale_invariant:
            return float(
                np.trace(x.p_inv @ (xi[0].T @ eta[0]))
                + np.trace(x.q_inv @ (xi[1].T @ eta[1]))
            )
        return float(np.vdot(xi[0], eta[0]) + np.vdot(xi[1], eta[1]))

    # -- projections ------------------------------------------------------------

    def psi_project(self, x, z) -> FactorTuple:
        # The total space is open in the product of matrix spaces, so every
        # factor-shaped perturbation is already tangent.
        return FactorTuple(z)

    def pi_project(self, x, eta) -> FactorTuple:
        lam = self._fiber_component(x, eta)
        return FactorTuple((eta[0] + x.G @ lam, eta[1] - x.H @ lam.T))

    def _fiber_component(self, x, eta) -> np.ndarray:
        """L such that eta - (-G L, H L^T) is horizontal."""
        if self.scale_invariant:
            c = x.P @ (x.H.T @ eta[1]) - (eta[0].T @ x.G) @ x.Q
            ct = x.p_inv_sqrt @ c @ x.p_sqrt
            xt = kernels.lyapunov_from_eigh(x._lyap_w, x._lyap_q, ct)
            return (x.p_sqrt @ xt @ x.p_inv_sqrt).T
        c = eta[1].T @ x.H - x.G.T @ eta[0]
        return kernels.solve_sylvester_spd(x.P, x.Q, c)

    def horizontality_defect(self, x, xi) -> float:
        if self.scale_invariant:
            lhs = xi[0].T @ x.G @ x.Q
            rhs = x.P @ (x.H.T @ xi[1])
        else:
            lhs = x.G.T @ xi[0]
            rhs = xi[1].T @ x.H
        num = np.linalg.norm(lhs - rhs)
        den = np.linalg.norm(lhs) + np.linalg.norm(rhs) + _TINY
        return float(num / den)

    # -- retraction ----------------------------------------------------------

    def retract(self, x, xi) -> FullRankPoint:
        return FullRankPoint(x.G + xi[0], x.H + xi[1])

    # -- gradient and Hessian --------------------------------------------------

    def rgrad_from_partials(self, x, partials) -> FactorTuple:
        if self.scale_invariant:
            return FactorTuple((partials[0] @ x.P, partials[1] @ x.Q))
        return FactorTuple(partials)

    def hess_apply(self, x, xi, partials, dpartials) -> FactorTuple:
        if not self.scale_invariant:
            return self.pi_project(x, FactorTuple(dpartials))
        phi_g, phi_h = partials
        dphi_g, dphi_h = dpartials
        grad_g = phi_g @ x.P
        grad_h = phi_h @ x.Q
        # Product rule on the Gram scaling of the gradient field.
        dgrad_g = dphi_g @ x.P + phi_g @ (xi[0].T @ x.G + x.G.T @ xi[0])
        dgrad_h = dphi_h @ x.Q + phi_h @ (xi[1].T @ x.H + x.H.T @ xi[1])
        corr_g = self._connection_term(x.G, x.p_inv, xi[0], grad_g)
        corr_h = self._connection_term(x.H, x.q_inv, xi[1], grad_h)
        return self.pi_project(x, FactorTuple((dgrad_g + corr_g, dgrad_h + corr_h)))

    @staticmethod
    def _connection_term(f, gram_inv, xi, eta) -> np.ndarray:
        """Correction making the covariant derivative metric-compatible on
        one full-rank factor with the Gram-inverse-weighted metric."""
        sym = kernels.sym_part
        return (
            -eta @ gram_inv @ sym(f.T @ xi)
            - xi @ gram_inv @ sym(f.T @ eta)
            + f @ gram_inv @ sym(eta.T @ xi)
        )

    # -- fiber ------------------------------------------------------------------

    def vertical_basis(self, x) -> list[FactorTuple]:
        r = x.rank
        basis = []
        for a in range(r):
            for b in range(r):
                lam = np.zeros((r, r))
                lam[a, b] = 1.0
                basis.append(FactorTuple((-x.G @ lam, x.H @ lam.T)))
        return basis

    def random_fiber_element(self, r, rng) -> np.ndarray:
        # Random well-conditioned invertible matrix.
        q1 = np.linalg.qr(rng.standard_normal((r, r)))[0]
        q2 = np.linalg.qr(rng.standard_normal((r, r)))[0]
        return q1 @ np.diag(rng.uniform(0.5, 2.0, r)) @ q2

    def move_along_fiber(self, x, m) -> FullRankPoint:
        m_inv = np.linalg.inv(m)
        return FullRankPoint(x.G @ m_inv, x.H @ m.T)

    def transport_tangent(self, x, xi, m) -> FactorTuple:
        m_inv = np.linalg.inv(m)
        return FactorTuple((xi[0] @ m_inv, xi[1] @ m.T))

    # -- linearized search path ---------------------------------------------------

    def path_terms(self, x, xi):
        """Coefficient pairs of P((x + s xi) product) by power of s."""
        return [
            [(x.G, x.H)],
            [(x.G, xi[1]), (xi[0], x.H)],
            [(xi[0], xi[1])],
        ]
