"""Dense kernel tests: each solver is checked against an independent oracle
(Kronecker-vectorized linear solve, SVD, Taylor series, grid search) before
any identity or special case is asserted.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedrank.errors import (
    RankDropError,
    SingularCoefficientError,
    SymmetryViolationError,
    UnboundedPolynomialError,
)
from fixedrank.kernels import (
    minimize_polynomial,
    polar_factor,
    skew_part,
    solve_lyapunov,
    solve_sylvester_spd,
    spd_sqrt_pair,
    svd_fix_signs,
    sym_expm,
    sym_part,
    thin_svd,
)


def random_spd(rng, r, spread=10.0):
    q = np.linalg.qr(rng.standard_normal((r, r)))[0]
    w = np.exp(rng.uniform(0.0, np.log(spread), r))
    return (q * w) @ q.T


def lyapunov_kron_oracle(a, rhs):
    # vec(AX + XA) = (I (x) A + A^T (x) I) vec(X), column-major vec.
    r = a.shape[0]
    eye = np.eye(r)
    m = np.kron(eye, a) + np.kron(a.T, eye)
    return np.linalg.solve(m, rhs.reshape(-1, order="F")).reshape((r, r), order="F")


class TestLyapunov:
    def test_identity_coefficient_halves_rhs(self):
        rhs = np.array([[1.0, 2.0], [2.0, -5.0]])
        x = solve_lyapunov(np.eye(2), rhs)
        np.testing.assert_allclose(x, rhs / 2.0, rtol=0, atol=1e-15)

    def test_diagonal_coefficient_divides_by_eigenvalue_sums(self):
        # a = diag(1, 2): the (1,2) entry of X is rhs_12 / (1 + 2).
        a = np.diag([1.0, 2.0])
        rhs = np.array([[0.0, 3.0], [3.0, 0.0]])
        x = solve_lyapunov(a, rhs)
        assert abs(x[0, 1] - 1.0) <= 1e-14
        assert abs(x[1, 0] - 1.0) <= 1e-14

    def test_matches_kronecker_solve(self):
        rng = np.random.default_rng(0)
        a = random_spd(rng, 4)
        rhs = rng.standard_normal((4, 4))
        x = solve_lyapunov(a, rhs)
        np.testing.assert_allclose(x, lyapunov_kron_oracle(a, rhs), atol=1e-10)

    def test_residual_small_over_many_instances(self):
        rng = np.random.default_rng(7)
        for k in range(1000):
            r = 1 + k % 8
            a = random_spd(rng, r)
            rhs = rng.standard_normal((r, r))
            rhs = sym_part(rhs) if k % 2 == 0 else skew_part(rhs)
            x = solve_lyapunov(a, rhs)
            resid = np.linalg.norm(a @ x + x @ a - rhs)
            assert resid <= 1e-12 * max(1.0, np.linalg.norm(rhs))

    def test_symmetric_rhs_gives_symmetric_solution(self):
        rng = np.random.default_rng(3)
        a = random_spd(rng, 5)
        rhs = sym_part(rng.standard_normal((5, 5)))
        x = solve_lyapunov(a, rhs)
        assert np.abs(x - x.T).max() <= 1e-12 * np.abs(x).max()

    def test_skew_rhs_gives_skew_solution(self):
        rng = np.random.default_rng(4)
        a = random_spd(rng, 5)
        rhs = skew_part(rng.standard_normal((5, 5)))
        x = solve_lyapunov(a, rhs)
        assert np.abs(x + x.T).max() <= 1e-12 * max(np.abs(x).max(), 1e-300)

    def test_rejects_indefinite_coefficient(self):
        with pytest.raises(SingularCoefficientError):
            solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))


class TestSylvester:
    def test_matches_kronecker_solve(self):
        rng = np.random.default_rng(1)
        a = random_spd(rng, 3)
        b = random_spd(rng, 3)
        rhs = rng.standard_normal((3, 3))
        x = solve_sylvester_spd(a, b, rhs)
        eye = np.eye(3)
        m = np.kron(eye, a) + np.kron(b.T, eye)
        oracle = np.linalg.solve(m, rhs.reshape(-1, order="F")).reshape((3, 3), order="F")
        np.testing.assert_allclose(x, oracle, atol=1e-10)

    def test_equal_coefficients_reduce_to_lyapunov(self):
        rng = np.random.default_rng(2)
        a = random_spd(rng, 4)
        rhs = rng.standard_normal((4, 4))
        np.testing.assert_allclose(
            solve_sylvester_spd(a, a, rhs), solve_lyapunov(a, rhs), atol=1e-12
        )

    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_residual_property(self, r, seed):
        rng = np.random.default_rng(seed)
        a = random_spd(rng, r)
        b = random_spd(rng, r)
        rhs = rng.standard_normal((r, r))
        x = solve_sylvester_spd(a, b, rhs)
        resid = np.linalg.norm(a @ x + x @ b - rhs)
        assert resid <= 1e-11 * max(1.0, np.linalg.norm(rhs))


class TestPolarFactor:
    def test_single_column(self):
        d = np.array([[3.0], [4.0]])
        np.testing.assert_allclose(polar_factor(d), [[0.6], [0.8]], atol=1e-15)

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(5)
        d = rng.standard_normal((50, 5))
        u, _, vt = np.linalg.svd(d, full_matrices=False)
        np.testing.assert_allclose(polar_factor(d), u @ vt, atol=1e-12)

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            d = rng.standard_normal((12, 4))
            uf = polar_factor(d)
            np.testing.assert_allclose(uf.T @ uf, np.eye(4), atol=1e-12)

    def test_orthonormal_input_is_fixed_point(self):
        rng = np.random.default_rng(8)
        q = np.linalg.qr(rng.standard_normal((9, 3)))[0]
        np.testing.assert_allclose(polar_factor(q), q, atol=1e-13)

    def test_rank_deficient_raises(self):
        d = np.ones((4, 2))  # both columns identical
        with pytest.raises(RankDropError):
            polar_factor(d)


class TestSymExpm:
    def test_diagonal(self):
        s = np.diag([1.0, -1.0])
        np.testing.assert_allclose(
            sym_expm(s), np.diag([np.e, 1.0 / np.e]), rtol=1e-14
        )

    def test_matches_taylor_series_oracle(self):
        rng = np.random.default_rng(9)
        s = sym_part(rng.standard_normal((4, 4)))
        # Scaling-and-squaring Taylor oracle: exp(S) = exp(S/2^k)^(2^k).
        k = 10
        small = s / 2.0**k
        term = np.eye(4)
        total = np.eye(4)
        for n in range(1, 30):
            term = term @ small / n
            total = total + term
        for _ in range(k):
            total = total @ total
        np.testing.assert_allclose(sym_expm(s), total, atol=1e-10)

    def test_eigenvalues_are_exponentials(self):
        rng = np.random.default_rng(10)
        s = sym_part(rng.standard_normal((6, 6)))
        got = np.sort(np.linalg.eigvalsh(sym_expm(s)))
        want = np.sort(np.exp(np.linalg.eigvalsh(s)))
        np.testing.assert_allclose(got, want, rtol=1e-10)

    def test_rejects_asymmetric_input(self):
        with pytest.raises(SymmetryViolationError):
            sym_expm(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_zero_maps_to_identity(self):
        np.testing.assert_array_equal(sym_expm(np.zeros((3, 3))), np.eye(3))


class TestThinSvd:
    def test_identity(self):
        u, s, vt = thin_svd(np.eye(3))
        np.testing.assert_allclose(u, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(s, np.ones(3), atol=1e-15)
        np.testing.assert_allclose(vt, np.eye(3), atol=1e-15)

    def test_rank_one_outer_product(self):
        a = np.array([1.0, -2.0, 2.0])
        b = np.array([3.0, 4.0])
        _, s, _ = thin_svd(np.outer(a, b))
        assert abs(s[0] - np.linalg.norm(a) * np.linalg.norm(b)) <= 1e-12
        assert s[1] <= 1e-12 * s[0]

    def test_truncation_tail_energy(self):
        # Frobenius error of the rank-5 truncation equals the tail energy.
        rng = np.random.default_rng(11)
        a = rng.standard_normal((30, 20))
        u, s, vt = thin_svd(a, k=5)
        err = np.linalg.norm(a - (u * s) @ vt) ** 2
        tail = np.sum(np.linalg.svd(a, compute_uv=False)[5:] ** 2)
        np.testing.assert_allclose(err, tail, rtol=1e-10)

    def test_reconstructs_input(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((8, 6))
        u, s, vt = thin_svd(a)
        np.testing.assert_allclose((u * s) @ vt, a, atol=1e-12)

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(13)
        a = rng.standard_normal((10, 4))
        u1, _, vt1 = thin_svd(a)
        # Hand the raw SVD flipped signs; the fix must undo them.
        u0, s0, vt0 = np.linalg.svd(a, full_matrices=False)
        flip = np.array([1.0, -1.0, 1.0, -1.0])
        u2, vt2 = svd_fix_signs(u0 * flip, vt0 * flip[:, None])
        np.testing.assert_allclose(u1, u2, atol=1e-14)
        np.testing.assert_allclose(vt1, vt2, atol=1e-14)
        lead = np.abs(u1).argmax(axis=0)
        assert (u1[lead, np.arange(4)] >= 0).all()


class TestSpdSqrtPair:
    def test_roundtrip(self):
        rng = np.random.default_rng(14)
        b = random_spd(rng, 5)
        rt, irt = spd_sqrt_pair(b)
        np.testing.assert_allclose(rt @ rt, b, atol=1e-12 * np.abs(b).max())
        np.testing.assert_allclose(rt @ irt, np.eye(5), atol=1e-12)

    def test_rejects_negative_matrix(self):
        with pytest.raises(SingularCoefficientError):
            spd_sqrt_pair(np.diag([1.0, -2.0]))


def grid_minimum(coeffs, lo=-100.0, hi=100.0, step=1e-4):
    s = np.arange(lo, hi + step, step)
    vals = np.polynomial.polynomial.polyval(s, coeffs)
    i = int(np.argmin(vals))
    return s[i], vals[i]


class TestMinimizePolynomial:
    def test_shifted_square(self):
        # (s - 3)^2 = 9 - 6 s + s^2
        s, val = minimize_polynomial(np.array([9.0, -6.0, 1.0]))
        assert abs(s - 3.0) <= 1e-10
        assert abs(val) <= 1e-12

    def test_pure_sextic(self):
        s, val = minimize_polynomial(np.array([0.0, 0, 0, 0, 0, 0, 1.0]))
        assert abs(s) <= 1e-8
        assert abs(val) <= 1e-12

    def test_constant(self):
        assert minimize_polynomial(np.array([4.0])) == (0.0, 4.0)

    def test_matches_grid_search(self):
        rng = np.random.default_rng(15)
        for _ in range(25):
            c = rng.standard_normal(7)
            c[6] = abs(c[6]) + 0.1
            s, _ = minimize_polynomial(c)
            s_grid, _ = grid_minimum(c)
            assert abs(s - s_grid) <= 1e-3

    def test_stationarity_bound(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            c = rng.standard_normal(5)
            c[4] = abs(c[4]) + 0.05
            s, _ = minimize_polynomial(c)
            deriv = np.polynomial.Polynomial(c).deriv()(s)
            assert abs(deriv) <= 1e-8 * (1.0 + np.abs(c).max())

    def test_odd_degree_unbounded(self):
        with pytest.raises(UnboundedPolynomialError):
            minimize_polynomial(np.array([0.0, 0.0, 0.0, 1.0]))

    def test_negative_leading_unbounded(self):
        with pytest.raises(UnboundedPolynomialError):
            minimize_polynomial(np.array([0.0, 0.0, -1.0]))

    def test_tiny_positive_leading_term_is_not_trimmed_to_unbounded(self):
        # |t a + t^2 b|^2 with |b| << |a| and <a,b> < 0: the quartic
        # coefficient is tiny next to the cross term but the polynomial is a
        # sum of squares, so it must minimize, not raise.
        a, b = 1.0, -1e-8
        c = np.array([0.0, 0.0, a * a, 2 * a * b, b * b])
        s, val = minimize_polynomial(c)
        assert np.isfinite(s)
        grid = np.linspace(-10, 10, 20001)
        assert val <= np.polynomial.polynomial.polyval(grid, c).min() + 1e-12

    def test_tie_resolves_to_smallest_argument(self):
        # s^4 - 2 s^2 has minima at +-1; the contract picks -1.
        s, _ = minimize_polynomial(np.array([0.0, 0.0, -2.0, 0.0, 1.0]))
        assert abs(s + 1.0) <= 1e-10

    def test_rejects_overlong_input(self):
        with pytest.raises(ValueError):
            minimize_polynomial(np.zeros(8))

    def test_lower_bound_restricts_to_ray(self):
        # (s+3)^2 has its global minimum at -3; on [0, inf) the boundary
        # wins.  An interior forward minimum is untouched by the bound.
        behind = np.array([9.0, 6.0, 1.0])
        assert minimize_polynomial(behind)[0] == -3.0
        s, val = minimize_polynomial(behind, lower=0.0)
        assert s == 0.0 and val == 9.0
        ahead = np.array([9.0, -6.0, 1.0])
        s, val = minimize_polynomial(ahead, lower=0.0)
        assert abs(s - 3.0) <= 1e-10

    def test_lower_bound_breaks_symmetric_tie_forward(self):
        # s^4 - 2 s^2: minima at -1 and +1; the ray keeps only +1.
        c = np.array([0.0, 0.0, -2.0, 0.0, 1.0])
        s, _ = minimize_polynomial(c, lower=0.0)
        assert abs(s - 1.0) <= 1e-10

    def test_lower_bound_skips_deeper_backward_basin(self):
        # Quartic with a shallow forward minimum and a deeper one behind
        # the origin: the ray result must be the forward critical point.
        roots_poly = np.polynomial.Polynomial.fromroots([-4.0, -4.0, 2.0, 2.0])
        c = roots_poly.coef + np.array([0.0, 1.0, 0.0, 0.0, 0.0])  # tilt
        s_global, _ = minimize_polynomial(c)
        assert s_global < 0
        s_ray, val_ray = minimize_polynomial(c, lower=0.0)
        assert s_ray > 0
        grid = np.linspace(0.0, 10.0, 100001)
        assert val_ray <= np.polynomial.polynomial.polyval(grid, c).min() + 1e-10


class TestSymSkewParts:
    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_decomposition_identity(self, r, seed):
        a = np.random.default_rng(seed).standard_normal((r, r))
        np.testing.assert_allclose(sym_part(a) + skew_part(a), a, atol=1e-14)
        np.testing.assert_allclose(sym_part(a), sym_part(a).T, atol=1e-14)
        np.testing.assert_allclose(skew_part(a), -skew_part(a).T, atol=1e-14)

    def test_transpose_first_negates(self):
        a = np.arange(9.0).reshape(3, 3)
        np.testing.assert_array_equal(skew_part(a, transpose_first=True), -skew_part(a))
