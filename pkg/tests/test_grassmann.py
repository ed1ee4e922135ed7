"""
Tests for frames, the rotation chart and projector derivatives.
"""

import numpy as np
import pytest
from pytest import approx

from projection_lab.utils.errors import InputError, PreconditionError
from projection_lab.utils.grassmann import (
    ChartPoint,
    Frame,
    chart_point_frame,
    chart_spanning_vectors,
    check_chart_angles,
    complement,
    projection_norms,
    projector,
    projector_derivative,
    projector_matrix,
    rotate,
    rotation_chain,
    rotation_chain_derivative,
    span_projector,
    subspace_distance,
    tangent_projection_derivative,
)


def _random_chart(rng, n, m):
    base = Frame.random(n, m, rng)
    return ChartPoint.at(base)


def _moved_projection(chart, i, j, z, h):
    m, n = chart.base.plane_dim, chart.base.ambient_dim
    angles = np.zeros((m, n - m))
    angles[i, j - m] = h
    frame = chart_point_frame(ChartPoint(chart.base, chart.complement, angles))
    return projector_matrix(frame.basis) @ z


class TestFrame:
    def test_standard_frame(self):
        f = Frame.standard(4, 2)
        assert f.ambient_dim == 4 and f.plane_dim == 2

    def test_rejects_non_orthonormal_basis(self):
        with pytest.raises(InputError):
            Frame([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])

    def test_rejects_full_space(self):
        with pytest.raises(InputError):
            Frame(np.eye(3))

    def test_from_vectors_spans_the_same_plane(self):
        f = Frame.from_vectors([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
        assert subspace_distance(f, Frame.standard(3, 2)) == approx(0.0, abs=1e-12)

    def test_complement_is_orthogonal(self):
        rng = np.random.default_rng(0)
        f = Frame.random(5, 2, rng)
        c = complement(f)
        assert c.plane_dim == 3
        assert np.max(np.abs(f.basis @ c.basis.T)) < 1e-12

    def test_projector_is_idempotent(self):
        rng = np.random.default_rng(1)
        P = projector(Frame.random(4, 2, rng)).entries
        assert np.allclose(P @ P, P)
        assert np.allclose(P, P.T)

    def test_complement_projector_is_the_identity_remainder(self):
        rng = np.random.default_rng(4)
        for n in range(2, 7):
            for m in range(1, n):
                f = Frame.random(n, m, rng)
                gap = projector(complement(f)).entries - (np.eye(n) - projector(f).entries)
                assert np.max(np.abs(gap)) <= 1e-10


class TestRotations:
    def test_rotate_turns_ei_towards_ej(self):
        x = rotate(np.array([1.0, 0.0, 0.0]), 0, 2, np.pi / 2)
        assert np.allclose(x, [0.0, 0.0, 1.0])

    def test_rotate_rejects_equal_indices(self):
        with pytest.raises(InputError):
            rotate(np.ones(3), 1, 1, 0.1)

    def test_rotate_preserves_the_norm(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            x = rng.standard_normal(6)
            i, j = rng.choice(6, size=2, replace=False)
            y = rotate(x, int(i), int(j), float(rng.uniform(-np.pi, np.pi)))
            assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)

    def test_chain_matches_repeated_rotation(self):
        rng = np.random.default_rng(2)
        n, m = 5, 2
        angles = rng.uniform(-0.7, 0.7, (m, n - m))
        E = chart_spanning_vectors(np.eye(n), m, angles[np.newaxis])[0]
        for i in range(m):
            x = np.eye(n)[i]
            for j in range(m, n):
                x = rotate(x, i, j, angles[i, j - m])
            assert np.allclose(E[i], x)

    def test_chain_derivative_matches_finite_differences(self):
        a = np.array([0.3, -0.2, 0.5])
        h = 1e-6
        D = rotation_chain_derivative(a)
        for q in range(3):
            step = np.zeros(3)
            step[q] = h
            fd = (rotation_chain(a + step) - rotation_chain(a - step)) / (2 * h)
            assert np.allclose(D[q], fd, atol=1e-8)

    def test_chart_angles_must_stay_below_quarter_turn(self):
        with pytest.raises(InputError):
            check_chart_angles(np.array([[np.pi / 4]]))

    def test_chart_point_at_zero_is_the_base(self):
        base = Frame.standard(3, 2)
        assert chart_point_frame(ChartPoint.at(base)) is base


class TestDerivatives:
    def test_tangent_derivative_matches_central_differences(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            m = int(rng.integers(1, n))
            chart = _random_chart(rng, n, m)
            i, j = int(rng.integers(0, m)), int(rng.integers(m, n))
            z = rng.standard_normal(n)
            h = 1e-5
            fd = (_moved_projection(chart, i, j, z, h) - _moved_projection(chart, i, j, z, -h)) / (2 * h)
            assert np.allclose(tangent_projection_derivative(chart, i, j, z), fd, atol=1e-7)

    def test_tangent_derivative_of_standard_chart(self):
        chart = ChartPoint(Frame.standard(3, 2), Frame([[0.0, 0.0, 1.0]]), np.zeros((2, 1)))
        out = tangent_projection_derivative(chart, 0, 2, np.array([0.0, 0.0, 1.0]))
        assert np.allclose(out, [1.0, 0.0, 0.0])
        out = tangent_projection_derivative(chart, 0, 2, np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out, [0.0, 0.0, 1.0])

    def test_tangent_derivative_needs_zero_angles(self):
        base = Frame.standard(3, 2)
        chart = ChartPoint(base, complement(base), np.array([[0.1], [0.0]]))
        with pytest.raises(PreconditionError):
            tangent_projection_derivative(chart, 0, 2, np.ones(3))

    def test_tangent_derivative_rejects_bad_slot(self):
        chart = ChartPoint.at(Frame.standard(3, 2))
        with pytest.raises(InputError):
            tangent_projection_derivative(chart, 0, 1, np.ones(3))

    def test_projector_derivative_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        E0 = rng.standard_normal((2, 5))
        E1 = rng.standard_normal((2, 5))
        h = 1e-6
        fd = (span_projector(E0 + h * E1) - span_projector(E0 - h * E1)) / (2 * h)
        assert np.allclose(projector_derivative(E0, E1), fd, atol=1e-6)


class TestMeasurements:
    def test_projection_norms_match_direct_projection(self):
        rng = np.random.default_rng(5)
        E = rng.standard_normal((6, 2, 4))
        w = rng.standard_normal(4)
        expected = [np.linalg.norm(span_projector(e) @ w) for e in E]
        assert np.allclose(projection_norms(E, w), expected)

    def test_orthogonal_lines_are_a_quarter_turn_apart(self):
        a = Frame([[1.0, 0.0, 0.0]])
        b = Frame([[0.0, 1.0, 0.0]])
        assert subspace_distance(a, b) == approx(np.pi / 2)

    def test_distance_of_rotated_plane(self):
        a = Frame.standard(3, 2)
        b = Frame([[np.cos(0.3), 0.0, np.sin(0.3)], [0.0, 1.0, 0.0]])
        assert subspace_distance(a, b) == approx(0.3)

    def test_distance_needs_matching_dimensions(self):
        with pytest.raises(InputError):
            subspace_distance(Frame.standard(3, 1), Frame.standard(3, 2))

    def test_nearby_chart_angles_give_distinct_planes(self):
        rng = np.random.default_rng(8)
        chart = _random_chart(rng, 5, 2)
        alpha = rng.uniform(-0.35, 0.35, (2, 3))
        for _ in range(20):
            direction = rng.uniform(-1, 1, (2, 3))
            nudged = alpha + 1e-3 * direction / np.max(np.abs(direction))
            planes = [chart_point_frame(ChartPoint(chart.base, chart.complement, a)) for a in (alpha, nudged)]
            assert subspace_distance(*planes) > 1e-6

    def test_distant_chart_angles_give_distinct_planes(self):
        rng = np.random.default_rng(9)
        chart = _random_chart(rng, 4, 2)
        for _ in range(20):
            a, b = rng.uniform(-0.7, 0.7, (2, 2, 2))
            planes = [chart_point_frame(ChartPoint(chart.base, chart.complement, x)) for x in (a, b)]
            assert subspace_distance(*planes) > 1e-6
