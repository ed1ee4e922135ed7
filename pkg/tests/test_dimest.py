"""
Tests for the dimension estimators.

Core claims:
    - box counting recovers 1 for the four-corner measure and 2 for the square
    - the correlation integral recovers log 2 / log 3 for the middle-thirds measure
    - atomic input yields 0 with a warning instead of a fitted slope
    - estimates do not depend on how the support sits in the ambient space
    - the t-energy trend separates t below and above the dimension
    - energy trends use only resolutions with enough points
    - projecting or switching to the correlation integral never raises the estimate
    - projecting onto an m-plane lowers the estimate by at most the codimension
"""

import math

import numpy as np
import pytest
from pytest import approx

from projection_lab.utils.dimest import (
    box_counting_dim,
    correlation_dim,
    discrete_energy,
    energy_diagnostic,
    project_points,
    select_window,
)
from projection_lab.utils.errors import InputError
from projection_lab.utils.fractal import (
    SampledMeasure,
    embedded,
    four_corner_cantor,
    lebesgue_ball,
    line_cantor,
    uniform_square,
)
from projection_lab.utils.grassmann import Frame

CANTOR_DIM = math.log(2) / math.log(3)


def _make_skewed_sheet(N=50000, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.random((N, 2)) ** 2 * np.array([1.0, 0.5])
    return SampledMeasure(pts, np.full(N, 1.0 / N))


class TestSelectWindow:
    def test_exact_line(self):
        x = np.arange(12, dtype=float)
        start, stop, slope, _, r2 = select_window(x, 1.5 * x + 2)
        assert slope == approx(1.5)
        assert r2 == approx(1.0)
        assert (start, stop) == (0, 10)

    def test_flat_data_has_zero_slope(self):
        x = np.arange(8, dtype=float)
        assert select_window(x, np.ones(8))[2] == 0.0

    def test_too_few_scales(self):
        with pytest.raises(InputError):
            select_window(np.arange(6.0), np.arange(6.0))


class TestProjection:
    def test_projection_keeps_weights(self):
        mu = lebesgue_ball(3, 100, seed=1)
        projected = project_points(Frame.standard(3, 2), mu)
        assert np.array_equal(projected.weights, mu.weights)
        assert np.all(projected.points[:, 2] == 0.0)

    def test_projection_onto_an_orthogonal_line_collapses(self):
        mu = embedded(four_corner_cantor(3), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        projected = project_points(Frame([[0.0, 0.0, 1.0]]), mu)
        assert projected.distinct_count() == 1

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            project_points(Frame.standard(4, 2), lebesgue_ball(3, 10, seed=0))


class TestBoxCounting:
    def test_four_corner_measure(self):
        est = box_counting_dim(four_corner_cantor(8), seed=1, threads=1)
        assert 0.9 <= est.value <= 1.1
        assert est.method == "box_counting"
        assert len(est.fit_rows()) == len(est.fit_scales)

    def test_unit_square(self):
        est = box_counting_dim(uniform_square(10 ** 5, seed=0), seed=1, threads=1)
        assert 1.9 <= est.value <= 2.1

    def test_single_point_is_zero_with_warning(self):
        mu = SampledMeasure(np.zeros((5000, 2)), np.full(5000, 1 / 5000))
        with pytest.warns(RuntimeWarning):
            est = box_counting_dim(mu)
        assert est.value == 0.0
        assert est.warnings

    def test_few_distinct_points_count_as_atomic(self):
        with pytest.warns(RuntimeWarning):
            est = box_counting_dim(four_corner_cantor(4))
        assert est.value == 0.0

    def test_invariant_under_isometric_embedding(self):
        sheet = _make_skewed_sheet()
        flat = box_counting_dim(sheet, seed=3, threads=1)
        lifted = box_counting_dim(embedded(sheet, "generic", ambient_dim=4, seed=5), seed=3, threads=1)
        assert lifted.value == approx(flat.value, abs=0.02)

    def test_thread_count_does_not_change_the_estimate(self):
        mu = four_corner_cantor(7)
        assert box_counting_dim(mu, seed=2, threads=1).value == box_counting_dim(mu, seed=2, threads=4).value


class TestCorrelation:
    def test_uniform_segment(self):
        est = correlation_dim(lebesgue_ball(1, 20000, seed=1), seed=1, threads=1)
        assert 0.9 <= est.value <= 1.1

    def test_middle_thirds_measure(self):
        est = correlation_dim(line_cantor(CANTOR_DIM, 10), seed=1, threads=1)
        assert 0.58 <= est.value <= 0.68

    def test_two_atoms_are_zero_with_warning(self):
        mu = SampledMeasure([[0.0], [1.0]], [0.5, 0.5])
        with pytest.warns(RuntimeWarning):
            assert correlation_dim(mu).value == 0.0

    def test_exactly_invariant_under_rotation(self):
        mu = four_corner_cantor(6)
        rotated = embedded(mu, "generic", ambient_dim=3, seed=8)
        a = correlation_dim(mu, pair_budget=200000, seed=4, threads=1)
        b = correlation_dim(rotated, pair_budget=200000, seed=4, threads=1)
        assert b.value == approx(a.value, abs=1e-9)


class TestEnergy:
    def test_two_point_energy(self):
        energy, clipped = discrete_energy(np.array([[0.0], [0.5]]), np.array([0.5, 0.5]), 1.0)
        assert energy == approx(2 * 0.25 * 2.0)
        assert clipped == 0

    def test_vanishing_exponent_leaves_off_diagonal_mass(self):
        mu = lebesgue_ball(2, 1000, seed=3)
        energy, _ = discrete_energy(mu.points, mu.weights, 1e-12)
        assert energy == approx(1 - 1 / 1000, rel=1e-6)

    def test_coincident_points_are_clipped(self):
        _, clipped = discrete_energy(np.zeros((3, 1)), np.full(3, 1 / 3), 0.5)
        assert clipped == 3

    def test_trend_separates_finite_and_divergent_energies(self):
        mu = line_cantor(1.0, 12)
        finite = energy_diagnostic(mu, 0.5, seed=1)
        divergent = energy_diagnostic(mu, 1.2, seed=1)
        assert finite.finite_trend
        assert not divergent.finite_trend
        assert finite.point_counts == (16, 256, 4096)

    def test_coarsening_stops_at_the_first_level(self):
        diag = energy_diagnostic(four_corner_cantor(4), 0.5, seed=1)
        assert diag.point_counts == (16, 256)
        assert len(diag.ratios) == 1

    def test_coarsening_skips_levels_with_too_few_points(self):
        diag = energy_diagnostic(lebesgue_ball(2, 20000, seed=0), 1.5, seed=1)
        assert diag.point_counts == (78, 4096)
        assert all(math.isfinite(r) for r in diag.ratios)
        assert all(v > 0 for v in diag.values)

    def test_single_resolution_has_no_trend(self):
        with pytest.warns(RuntimeWarning, match="energy trend undetermined"):
            diag = energy_diagnostic(four_corner_cantor(1), 0.5)
        assert diag.point_counts == (4,)
        assert diag.ratios == ()
        assert not diag.finite_trend
        assert diag.warnings

    def test_needs_a_generated_measure(self):
        mu = SampledMeasure([[0.0], [1.0]], [0.5, 0.5])
        with pytest.raises(InputError):
            energy_diagnostic(mu, 0.5)

    def test_rejects_non_positive_exponent(self):
        with pytest.raises(InputError):
            energy_diagnostic(line_cantor(1.0, 8), 0.0)


class TestEstimatorConsistency:
    def test_projection_does_not_raise_the_estimate(self):
        mu = embedded(four_corner_cantor(7), "generic", ambient_dim=3, seed=2)
        full = box_counting_dim(mu, seed=1, threads=1).value
        rng = np.random.default_rng(4)
        for _ in range(3):
            projected = project_points(Frame.random(3, 2, rng), mu)
            assert box_counting_dim(projected, seed=1, threads=1).value <= full + 0.1

    @pytest.mark.parametrize("make", [lambda: four_corner_cantor(8), lambda: lebesgue_ball(1, 20000, seed=2)])
    def test_correlation_never_exceeds_box_counting(self, make):
        mu = make()
        box = box_counting_dim(mu, seed=1, threads=1).value
        corr = correlation_dim(mu, seed=1, threads=1).value
        assert corr <= box + 0.15

    def test_projection_loses_at_most_the_codimension(self):
        mu = embedded(lebesgue_ball(2, 50000, seed=3), "generic", ambient_dim=3, seed=6)
        full = box_counting_dim(mu, seed=1, threads=1).value
        rng = np.random.default_rng(5)
        for _ in range(3):
            projected = project_points(Frame.random(3, 2, rng), mu)
            assert box_counting_dim(projected, seed=1, threads=1).value >= full - 1 - 0.1
