"""
Tests for the measure generators and their file formats.
"""

import math

import numpy as np
import pytest
from pytest import approx

from projection_lab.utils.errors import InputError
from projection_lab.utils.fractal import (
    MeasureSpec,
    SampledMeasure,
    atom,
    embedded,
    four_corner_cantor,
    generate,
    lebesgue_ball,
    line_cantor,
    load_binary,
    load_csv,
    product_embed,
    refine,
    resolution_step,
    save_binary,
    save_csv,
    sharpness_measure,
)

CANTOR_DIM = math.log(2) / math.log(3)


class TestSampledMeasure:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(InputError):
            SampledMeasure(np.zeros((2, 2)), [0.5, 0.4])

    def test_weights_must_be_nonnegative(self):
        with pytest.raises(InputError):
            SampledMeasure(np.zeros((2, 1)), [1.5, -0.5])

    def test_support_must_stay_in_radius_two(self):
        with pytest.raises(InputError):
            SampledMeasure([[3.0, 0.0]], [1.0])

    def test_point_and_weight_counts_must_match(self):
        with pytest.raises(InputError):
            SampledMeasure(np.zeros((3, 2)), [0.5, 0.5])

    def test_one_dimensional_points_become_a_column(self):
        mu = SampledMeasure([0.0, 0.5], [0.5, 0.5])
        assert mu.points.shape == (2, 1)

    def test_distinct_count(self):
        mu = SampledMeasure([[0.0], [0.0], [1.0]], [0.25, 0.25, 0.5])
        assert mu.distinct_count() == 2


class TestCantorMeasures:
    def test_four_corner_first_level(self):
        mu = four_corner_cantor(1)
        expected = {(0.0, 0.0), (0.75, 0.0), (0.0, 0.75), (0.75, 0.75)}
        assert {tuple(p) for p in mu.points.tolist()} == expected
        assert np.allclose(mu.weights, 0.25)

    def test_four_corner_counts_and_dimension(self):
        mu = four_corner_cantor(6)
        assert mu.n_points == 4 ** 6
        assert mu.distinct_count() == 4 ** 6
        assert mu.weights.sum() == approx(1.0)
        assert mu.nominal_dim == 1.0

    @pytest.mark.parametrize("level", [0, 13, 2.5])
    def test_four_corner_rejects_bad_level(self, level):
        with pytest.raises(InputError):
            four_corner_cantor(level)

    def test_middle_thirds_second_level(self):
        mu = line_cantor(CANTOR_DIM, 2)
        assert np.allclose(np.sort(mu.points[:, 0]), [0.0, 2 / 9, 2 / 3, 8 / 9])
        assert mu.nominal_dim == approx(CANTOR_DIM)

    def test_full_dimension_is_a_dyadic_grid(self):
        mu = line_cantor(1.0, 3)
        assert np.allclose(np.sort(mu.points[:, 0]), np.arange(8) / 8)

    @pytest.mark.parametrize("s", [0.0, 1.5, -0.2])
    def test_line_cantor_rejects_bad_dimension(self, s):
        with pytest.raises(InputError):
            line_cantor(s, 4)


class TestLebesgueAndAtoms:
    def test_ball_samples_stay_inside(self):
        mu = lebesgue_ball(3, 5000, seed=1)
        assert np.max(np.linalg.norm(mu.points, axis=1)) <= 1.0
        assert mu.nominal_dim == 3.0

    def test_segment_is_centred(self):
        mu = lebesgue_ball(1, 20000, seed=2)
        assert abs(mu.points.mean()) <= 3 / math.sqrt(20000)

    def test_same_seed_same_points(self):
        assert np.array_equal(lebesgue_ball(2, 100, 5).points, lebesgue_ball(2, 100, 5).points)
        assert not np.array_equal(lebesgue_ball(2, 100, 5).points, lebesgue_ball(2, 100, 6).points)

    def test_atom(self):
        mu = atom(3)
        assert mu.n_points == 1
        assert mu.nominal_dim == 0.0
        assert mu.ambient_dim == 3


class TestEmbeddings:
    def test_embedding_along_explicit_rows(self):
        mu = embedded(four_corner_cantor(2), [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        assert mu.ambient_dim == 3
        assert np.all(mu.points[:, 1] == 0.0)
        assert mu.spec.variant == "embedded"

    def test_generic_embedding_needs_ambient_dimension(self):
        with pytest.raises(InputError):
            embedded(four_corner_cantor(2), "generic")

    def test_generic_embedding_preserves_distances(self):
        inner = four_corner_cantor(3)
        mu = embedded(inner, "generic", ambient_dim=4, seed=9)
        d_inner = np.linalg.norm(inner.points[1] - inner.points[7])
        d_outer = np.linalg.norm(mu.points[1] - mu.points[7])
        assert d_outer == approx(d_inner)

    def test_product_of_orthogonal_factors(self):
        cantor = line_cantor(CANTOR_DIM, 8)
        disk = lebesgue_ball(2, 5000, seed=3)
        mu = product_embed([(cantor, [[0.0, 1.0, 0.0]], None),
                            (disk, [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], None)], 3, 5000, seed=4)
        assert mu.n_points == 5000
        assert mu.nominal_dim == approx(2 + CANTOR_DIM)
        # the Cantor factor is centred, so its coordinate takes at most 2**8 values
        assert len(np.unique(mu.points[:, 1])) <= 2 ** 8

    def test_product_rejects_overlapping_factors(self):
        a = lebesgue_ball(1, 100, seed=1)
        with pytest.raises(InputError, match="overlap"):
            product_embed([(a, [[1.0, 0.0]], None), (a, [[1.0, 0.0]], None)], 2, 100, seed=0)

    def test_equal_weight_factor_is_permuted(self):
        disk = lebesgue_ball(2, 1000, seed=3)
        mu = product_embed([(disk, [[1.0, 0.0], [0.0, 1.0]], None)], 2, 1000, seed=0)
        assert mu.distinct_count() == 1000


class TestSharpnessMeasure:
    def test_nominal_dimension(self):
        mu = sharpness_measure(3, 1, 1, CANTOR_DIM, 2000, 8, seed=1)
        assert mu.nominal_dim == approx(2 + CANTOR_DIM)
        assert mu.ambient_dim == 3

    def test_flat_branch_drops_the_line_factor(self):
        mu = sharpness_measure(3, 1, 1, None, 2000, 8, seed=1)
        assert mu.nominal_dim == 2.0
        assert np.all(mu.points[:, 1] == 0.0)

    def test_atom_factor(self):
        mu = sharpness_measure(3, 1, 1, 0.0, 2000, 8, seed=1)
        assert mu.nominal_dim == 2.0

    @pytest.mark.parametrize("l, p", [(-1, 0), (2, 1), (0, 3)])
    def test_rejects_bad_regime(self, l, p):
        with pytest.raises(InputError):
            sharpness_measure(3, l, p, 0.5, 100, 4, seed=0)

    def test_empty_product_is_rejected(self):
        with pytest.raises(InputError):
            sharpness_measure(3, 0, 0, None, 100, 4, seed=0)


class TestSpecs:
    def test_spec_dict_round_trip_regenerates_points(self):
        mu = sharpness_measure(3, 1, 1, CANTOR_DIM, 1000, 6, seed=5)
        again = MeasureSpec.from_dict(mu.spec.to_dict()).generate()
        assert np.array_equal(mu.points, again.points)

    def test_unknown_variant(self):
        with pytest.raises(InputError):
            MeasureSpec("sierpinski")

    def test_refine_moves_levels_and_counts(self):
        assert refine(MeasureSpec("four_corner_cantor", level=6), 2).level == 8
        assert refine(MeasureSpec("lebesgue_ball", dim=2, n_points=4096, seed=1), -4).n_points == 256

    def test_resolution_steps(self):
        assert resolution_step(MeasureSpec("four_corner_cantor", level=8)) == 2
        assert resolution_step(MeasureSpec("line_cantor", level=12, s=1.0)) == 4
        assert resolution_step(MeasureSpec("lebesgue_ball", dim=2, n_points=10)) == 8

    def test_generate_embedded_spec(self):
        spec = MeasureSpec.from_dict({"variant": "embedded", "inner": {"variant": "four_corner_cantor", "level": 3},
                                      "frame": "generic", "ambient_dim": 3, "seed": 11})
        mu = generate(spec)
        assert mu.n_points == 64 and mu.ambient_dim == 3


class TestFiles:
    def test_csv_round_trip(self, tmp_path):
        mu = lebesgue_ball(3, 200, seed=7)
        path = save_csv(mu, tmp_path / "mu.csv")
        assert path.read_text().splitlines()[0] == "x_1,x_2,x_3,weight"
        again = load_csv(path)
        assert np.array_equal(again.points, mu.points)
        assert np.array_equal(again.weights, mu.weights)

    def test_binary_round_trip_keeps_the_spec(self, tmp_path):
        mu = four_corner_cantor(4)
        path = save_binary(mu, tmp_path / "mu.bin", seed=3)
        again = load_binary(path)
        assert np.array_equal(again.points, mu.points)
        assert again.spec.to_dict() == mu.spec.to_dict()
        assert again.nominal_dim == 1.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_csv(tmp_path / "absent.csv")
