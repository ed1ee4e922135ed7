"""
Tests for the exterior-algebra kernel.

Core claims:
    - gram_norm agrees with the Cauchy-Binet sum of squared minors
    - linearly dependent vectors give exactly 0
    - ‖∧_n L‖ = |det L| for square L
    - ‖v ∧ u‖ = ‖v‖·‖u‖ for mutually perpendicular lists
    - the norm is invariant under orthogonal maps and scales by |c|
"""

import numpy as np
import pytest
from pytest import approx

from projection_lab.utils.errors import InputError, PreconditionError
from projection_lab.utils.multivec import (
    LinearMap,
    SimpleMultivector,
    cauchy_binet_norm,
    gram_norm,
    perp_factor_check,
    wedge_apply,
    wedge_operator_norm,
)


def _integer_matrix(rng, r, n):
    return rng.integers(-3, 4, size=(r, n)).astype(float)


class TestSimpleMultivector:
    def test_rejects_more_vectors_than_dimensions(self):
        with pytest.raises(InputError):
            SimpleMultivector([[1, 0], [0, 1], [1, 1]])

    def test_rejects_ragged_input(self):
        with pytest.raises(InputError):
            SimpleMultivector([[1, 0, 0], [0, 1]])

    def test_rejects_non_finite(self):
        with pytest.raises(InputError):
            SimpleMultivector([[np.nan, 1.0]])

    def test_vectors_are_read_only(self):
        v = SimpleMultivector([[1.0, 2.0]])
        with pytest.raises(ValueError):
            v.vectors[0, 0] = 5.0


class TestGramNorm:
    def test_orthonormal_rows_have_unit_volume(self):
        assert gram_norm(np.eye(4)[:3]) == approx(1.0)

    def test_parallel_vectors_give_exact_zero(self):
        assert gram_norm([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]) == 0.0

    def test_zero_vector_gives_zero(self):
        assert gram_norm([[0.0, 0.0], [1.0, 0.0]]) == 0.0

    def test_single_vector_is_euclidean_norm(self):
        assert gram_norm([[3.0, 4.0]]) == approx(5.0)

    def test_parallelogram_area(self):
        assert gram_norm([[2.0, 0.0, 0.0], [1.0, 3.0, 0.0]]) == approx(6.0)

    def test_matches_cauchy_binet_on_integer_matrices(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            n = int(rng.integers(1, 7))
            r = int(rng.integers(1, n + 1))
            D = _integer_matrix(rng, r, n)
            expected = cauchy_binet_norm(D)
            assert abs(gram_norm(D) - expected) <= 1e-9 * (1 + expected)

    def test_invariant_under_orthogonal_maps(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            r = int(rng.integers(1, n + 1))
            D = rng.standard_normal((r, n))
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            assert gram_norm(D @ Q.T) == approx(gram_norm(D), rel=1e-9)

    @pytest.mark.parametrize("c", [-2.5, 0.1, 7.0])
    def test_scaling_one_vector_scales_by_its_absolute_value(self, c):
        D = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]])
        scaled = D.copy()
        scaled[0] *= c
        assert gram_norm(scaled) == approx(abs(c) * gram_norm(D))


class TestWedgeOperatorNorm:
    def test_full_wedge_is_absolute_determinant(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            L = _integer_matrix(rng, n, n)
            det = abs(np.linalg.det(L))
            assert abs(wedge_operator_norm(L, n) - det) <= 1e-9 * (1 + det)

    def test_first_wedge_is_spectral_norm(self):
        L = np.diag([3.0, 2.0, 1.0])
        assert wedge_operator_norm(L, 1) == approx(3.0)
        assert wedge_operator_norm(LinearMap(L), 2) == approx(6.0)

    @pytest.mark.parametrize("r", [0, 4, 2.5])
    def test_rejects_bad_degree(self, r):
        with pytest.raises(InputError):
            wedge_operator_norm(np.eye(3), r)

    def test_bounds_image_volume(self):
        rng = np.random.default_rng(2)
        L = rng.standard_normal((4, 5))
        v = rng.standard_normal((2, 5))
        image = wedge_apply(L, v)
        assert gram_norm(image) <= wedge_operator_norm(L, 2) * gram_norm(v) * (1 + 1e-12)

    def test_wedge_apply_checks_dimensions(self):
        with pytest.raises(InputError):
            wedge_apply(np.eye(3), [[1.0, 0.0]])


class TestPerpFactor:
    def test_perpendicular_lists_factor(self):
        rng = np.random.default_rng(3)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        v = Q[:2] * np.array([[2.0], [0.5]])
        u = Q[2:4] * 3.0
        assert perp_factor_check(v, u)

    def test_non_perpendicular_input_is_rejected(self):
        with pytest.raises(PreconditionError):
            perp_factor_check([[1.0, 0.0, 0.0]], [[1.0, 1.0, 0.0]])
