"""Small dense linear-algebra kernels.

Everything here operates on matrices whose side is the factorization rank
r (or a thin d-by-r factor), so all costs are O(r^3) or O(d r^2).  These
routines are the only places in the package that touch eigendecompositions,
SVDs, or polynomial root finding; the geometry modules build on them.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    RankDropError,
    SingularCoefficientError,
    SymmetryViolationError,
    UnboundedPolynomialError,
)

# Repo-wide relative tolerance for declaring a matrix rank deficient.
RANK_TOL = 1e-12


def sym_part(a: np.ndarray) -> np.ndarray:
    """Symmetric part (a + a.T) / 2."""
    return (a + a.T) / 2.0


def skew_part(a: np.ndarray, transpose_first: bool = False) -> np.ndarray:
    """Skew-symmetric part of a square matrix.

    The default is the standard convention (a - a.T) / 2.  The flipped
    convention (a.T - a) / 2 is available behind ``transpose_first`` so the
    projection tests can demonstrate which one is consistent with the
    horizontal-space algebra (the standard one is; see the geometry tests).
    """
    if transpose_first:
        return (a.T - a) / 2.0
    return (a - a.T) / 2.0


def eigh_spd(a: np.ndarray, what: str = "matrix") -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric positive-definite matrix.

    Returns (eigenvalues, eigenvectors).  Raises SingularCoefficientError if
    the smallest eigenvalue is at or below RANK_TOL times the largest.
    """
    w, q = np.linalg.eigh(sym_part(a))
    if w[0] <= RANK_TOL * max(w[-1], 0.0):
        raise SingularCoefficientError(
            f"{what} is numerically singular or indefinite: "
            f"eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]"
        )
    return w, q


def lyapunov_from_eigh(
    w: np.ndarray, q: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Solve A X + X A = rhs given the eigendecomposition A = q diag(w) q.T."""
    c = q.T @ rhs @ q
    x = c / np.add.outer(w, w)
    return q @ x @ q.T


def solve_lyapunov(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A X + X A = rhs for symmetric positive-definite A.

    Uses the symmetric eigendecomposition of A: in the eigenbasis the
    equation decouples entrywise into x_ij = c_ij / (w_i + w_j).  A general
    (not necessarily symmetric) right-hand side is allowed; a symmetric rhs
    yields a symmetric X and a skew rhs yields a skew X.
    """
    w, q = eigh_spd(a, "Lyapunov coefficient")
    return lyapunov_from_eigh(w, q, rhs)


def solve_sylvester_spd(
    a: np.ndarray, b: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Solve A X + X B = rhs for symmetric positive-definite A and B."""
    wa, qa = eigh_spd(a, "Sylvester left coefficient")
    wb, qb = eigh_spd(b, "Sylvester right coefficient")
    c = qa.T @ rhs @ qb
    return qa @ (c / np.add.outer(wa, wb)) @ qb.T


def svd_fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Resolve SVD sign ambiguity deterministically.

    The largest-magnitude entry of each left singular vector is made
    nonnegative; the corresponding right singular vector is flipped to
    compensate.  Ties in magnitude resolve to the lowest row index.
    """
    u = u.copy()
    vt = vt.copy()
    lead = np.abs(u).argmax(axis=0)
    flip = u[lead, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    vt[flip, :] *= -1.0
    return u, vt


def thin_svd(a: np.ndarray, k: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD with deterministic signs and descending singular values.

    Returns (u, s, vt) with u of shape (m, k), s of shape (k,) and vt of
    shape (k, n).  k defaults to min(a.shape).
    """
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if k is not None:
        u, s, vt = u[:, :k], s[:k], vt[:k, :]
    u, vt = svd_fix_signs(u, vt)
    return u, s, vt


def polar_factor(d: np.ndarray) -> np.ndarray:
    """Orthonormal polar factor uf(D) = D (D.T D)^{-1/2} via thin SVD.

    Raises RankDropError when D is column rank deficient (smallest singular
    value at or below RANK_TOL times the largest).
    """
    u, s, vt = np.linalg.svd(d, full_matrices=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankDropError(
            f"polar factor of a rank-deficient matrix: "
            f"singular values span [{s[-1]:.3e}, {s[0]:.3e}]"
        )
    return u @ vt


def sym_expm(s: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix via eigendecomposition.

    Raises SymmetryViolationError when the input departs from symmetry by
    more than 1e-12 relative to its scale.
    """
    defect = np.abs(s - s.T).max(initial=0.0)
    scale = max(1.0, np.abs(s).max(initial=0.0))
    if defect > 1e-12 * scale:
        raise SymmetryViolationError(
            f"matrix exponential input is not symmetric: defect {defect:.3e}"
        )
    w, q = np.linalg.eigh(sym_part(s))
    return (q * np.exp(w)) @ q.T


def spd_sqrt_pair(b: np.ndarray, floor: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Square root and inverse square root of an SPD matrix.

    Eigenvalues are floored at ``floor`` times the trace before the inverse
    square root is formed, which keeps the pair finite for nearly singular
    but still positive inputs.
    """
    w, q = np.linalg.eigh(sym_part(b))
    lo = floor * max(np.trace(b), 0.0)
    if w[0] <= 0.0 and w[0] <= -lo:
        raise SingularCoefficientError(
            f"matrix square root of a non-positive matrix: min eigenvalue {w[0]:.3e}"
        )
    w = np.maximum(w, lo)
    rt = np.sqrt(w)
    return (q * rt) @ q.T, (q / rt) @ q.T


def minimize_polynomial(
    coeffs: np.ndarray, lower: float | None = None
) -> tuple[float, float]:
    """Global minimizer of a real polynomial that is bounded below.

    Parameters
    ----------
    coeffs : array of ascending-power coefficients, degree at most six.
    lower : when given, minimize over [lower, inf) instead of the whole
        line; the boundary point itself is always a candidate.  Step-size
        searches use this to stay on the forward ray of a direction even
        when a deeper basin exists behind the starting point.

    Returns
    -------
    (s, value) : the minimizing argument and the polynomial value there.
    Candidates are the real roots of the derivative (companion-matrix
    computation); ties resolve to the smallest s.  A constant polynomial
    returns (0, c0).  Raises UnboundedPolynomialError for polynomials that
    are unbounded below (odd degree, or even degree with a negative
    leading coefficient).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0 or c.size > 7:
        raise ValueError("expected 1..7 ascending coefficients")
    scale = np.abs(c).max()
    if scale == 0.0:
        return 0.0, 0.0
    # Trim numerically-zero leading coefficients so degenerate directions
    # (for example a direction with no quadratic term on the sampled set)
    # reduce to the true degree.
    keep = np.abs(c) > 1e-14 * scale
    deg = int(np.nonzero(keep)[0].max(initial=0))
    true_deg = int(np.nonzero(c)[0].max(initial=0))

    def _bounded(d: int) -> bool:
        return d == 0 or (d % 2 == 0 and c[d] > 0.0)

    # Never let the trim fabricate unboundedness: a sum-of-squares polynomial
    # can have a tiny positive leading coefficient under larger cross terms.
    if not _bounded(deg) and _bounded(true_deg):
        deg = true_deg
    c = c[: deg + 1]
    if deg == 0:
        return 0.0, float(c[0])
    if deg % 2 == 1 or c[deg] < 0.0:
        raise UnboundedPolynomialError(
            f"degree-{deg} polynomial with leading coefficient {c[deg]:.3e} "
            "is unbounded below"
        )
    poly = np.polynomial.Polynomial(c)
    roots = poly.deriv().roots()
    real = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
    if lower is not None:
        real = np.append(real[real >= lower], lower)
    if real.size == 0:
        # Bounded-below polynomials always have a real critical point; this
        # is unreachable for valid input but keeps the function total.
        return 0.0, float(poly(0.0))
    values = poly(real)
    vmin = values.min()
    # Near-equal minima (symmetric polynomials) resolve to the smallest s.
    tie = values <= vmin + 1e-10 * (1.0 + abs(vmin))
    s = real[tie].min()
    return float(s), float(poly(s))
