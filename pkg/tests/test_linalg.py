import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simplexgrad.errors import InvalidInput, RankDeficient
from simplexgrad.linalg import DEFAULT_RANK_RTOL, col_projector, cond2, pinv, spectral_norm

from oracles import EPS, demo_inverse, left_inverse

entries = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False, allow_subnormal=False)
shapes = st.tuples(st.integers(1, 8), st.integers(1, 8))
matrices = shapes.flatmap(lambda s: arrays(np.float64, s, elements=entries))


def norm(m):
    return float(np.linalg.norm(m, 2))


def effective_cond(res):
    """Ratio of the largest to the smallest retained singular value."""
    r = res.numerical_rank
    return float(res.singular_values[0] / res.singular_values[r - 1]) if r else 1.0


class TestPinv:
    def test_identity(self):
        np.testing.assert_array_equal(pinv(np.eye(2)).pinv, np.eye(2))

    def test_scalar(self):
        res = pinv([[2.0]])
        assert res.pinv[0, 0] == 0.5
        assert res.numerical_rank == 1

    def test_ill_conditioned_closed_form(self):
        theta = 0.1
        A = 10 * np.array([[1.0, -math.cos(theta)], [0.0, math.sin(theta)]])
        np.testing.assert_allclose(pinv(A).pinv, demo_inverse(theta), rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(pinv(A).pinv, [[0.1, 0.996664], [0.0, 1.001668]], atol=1e-6)

    def test_shape_is_transposed(self):
        assert pinv(np.ones((3, 5))).pinv.shape == (5, 3)

    def test_truncation_reported(self):
        res = pinv(np.array([[1.0, 0.0], [0.0, 1e-14]]))
        assert res.numerical_rank == 1 and not res.full_rank
        np.testing.assert_array_equal(res.pinv, [[1.0, 0.0], [0.0, 0.0]])

    def test_zero_matrix(self):
        res = pinv(np.zeros((2, 3)))
        assert res.numerical_rank == 0
        np.testing.assert_array_equal(res.pinv, np.zeros((3, 2)))

    @pytest.mark.parametrize("bad", [[[np.nan]], [[1.0, np.inf]]])
    def test_non_finite(self, bad):
        with pytest.raises(InvalidInput):
            pinv(bad)

    def test_overflow_is_refused(self):
        with pytest.raises(InvalidInput):
            pinv([[5e-324]])

    @pytest.mark.parametrize("rtol", [0.0, 1.0, -1e-3])
    def test_rtol_range(self, rtol):
        with pytest.raises(InvalidInput):
            pinv(np.eye(2), rtol)

    @settings(max_examples=200, deadline=None)
    @given(matrices)
    def test_moore_penrose_conditions(self, M):
        # the fixed tolerances hold for ordinarily conditioned matrices
        res = pinv(M)
        assume(effective_cond(res) <= 1e4)
        P = res.pinv
        nM, nP = norm(M), norm(P)
        assert norm(M @ P @ M - M) <= 1e-10 * nM + 1e-300
        assert norm(P @ M @ P - P) <= 1e-10 * nP + 1e-300
        assert norm((M @ P).T - M @ P) <= 1e-10
        assert norm((P @ M).T - P @ M) <= 1e-10

    @settings(max_examples=200, deadline=None)
    @given(matrices)
    def test_moore_penrose_conditions_scale_with_conditioning(self, M):
        res = pinv(M)
        P = res.pinv
        tol = 100 * effective_cond(res) * EPS
        nM, nP = norm(M), norm(P)
        # truncated singular values are left out of M P M by construction
        assert norm(M @ P @ M - M) <= (tol + DEFAULT_RANK_RTOL) * nM + 1e-300
        assert norm(P @ M @ P - P) <= tol * nP + 1e-300
        assert norm((M @ P).T - M @ P) <= tol
        assert norm((P @ M).T - P @ M) <= tol

    @settings(max_examples=100, deadline=None)
    @given(matrices, st.integers(-20, 20), st.booleans())
    def test_homogeneity_exact_scaling(self, M, exponent, negate):
        # c M is exact for powers of two, so any conditioning is fair game
        c = (-1.0 if negate else 1.0) * 2.0**exponent
        assume(np.all((M == 0) | (np.abs(M) >= 1e-280)))
        res, scaled = pinv(M), pinv(c * M)
        assert res.numerical_rank == scaled.numerical_rank
        np.testing.assert_allclose(scaled.pinv, res.pinv / c, rtol=1e-12,
                                   atol=1e-12 * norm(res.pinv) / abs(c))

    @settings(max_examples=100, deadline=None)
    @given(matrices, st.floats(0.01, 100.0), st.booleans())
    def test_homogeneity(self, M, c, negate):
        # rounding c M moves the result by about cond(M) eps
        res = pinv(M)
        assume(res.full_rank and cond2(M) <= 1e3)
        c = -c if negate else c
        scaled = pinv(c * M)
        np.testing.assert_allclose(scaled.pinv, res.pinv / c, rtol=1e-12,
                                   atol=1e-12 * norm(res.pinv) / abs(c))

    def test_full_column_rank_formula(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            rows = rng.integers(1, 9)
            cols = rng.integers(1, rows + 1)
            M = rng.uniform(-1, 1, (rows, cols))
            if np.linalg.cond(M) > 1e4:
                continue
            P = pinv(M).pinv
            assert norm(P - left_inverse(M)) <= 1e-8 * norm(P)


class TestNormsAndConditioning:
    def test_spectral_norm_diag(self):
        assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-15)

    def test_spectral_norm_gsg_b(self):
        B = np.hstack([-np.ones((3, 1)), np.eye(3)])
        assert spectral_norm(B) == pytest.approx(2.0, rel=1e-14)

    def test_spectral_norm_nilpotent(self):
        assert spectral_norm([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(1.0)

    def test_vector_is_euclidean(self):
        assert spectral_norm([3.0, 4.0]) == pytest.approx(5.0, rel=1e-15)

    def test_cond_diag(self):
        assert cond2(np.diag([10.0, 1.0])) == pytest.approx(10.0, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_cond_identity(self, n):
        assert cond2(np.eye(n)) == pytest.approx(1.0, rel=1e-14)

    def test_cond_small_angle(self):
        theta = 1e-4
        A = 10 * np.array([[1.0, -math.cos(theta)], [0.0, math.sin(theta)]])
        # brute-force 2x2 SVD value, ~2/theta
        assert cond2(A) == pytest.approx(19999.999983333, rel=1e-9)
        assert cond2(A) == pytest.approx(2 / theta, rel=1e-6)

    def test_cond_rank_deficient(self):
        with pytest.raises(RankDeficient):
            cond2([[1.0, 1.0], [1.0, 1.0]])


class TestProjector:
    def test_axis(self):
        P = col_projector(np.array([[1.0], [0.0]]))
        np.testing.assert_array_equal(P, [[1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_array_equal(P @ [5.0, 7.0], [5.0, 0.0])

    def test_invertible_gives_identity(self):
        A = np.array([[2.0, 1.0], [0.5, 3.0]])
        np.testing.assert_allclose(col_projector(A), np.eye(2), atol=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(matrices)
    def test_orthogonal_projector(self, A):
        P = col_projector(A)
        assert norm(P @ P - P) <= 1e-10
        assert norm(P.T - P) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(matrices)
    def test_matches_a_times_pinv(self, A):
        # the explicit product loses digits on ill-conditioned A
        res = pinv(A)
        s = res.singular_values[: res.numerical_rank]
        assume(s.size and s[0] / s[-1] < 1e4)
        np.testing.assert_allclose(col_projector(A), A @ pinv(A).pinv, atol=1e-10)
