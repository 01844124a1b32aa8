import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mol.commands import (
    CommandBounds,
    CommandError,
    DegenerateCommandError,
    ObjectiveSpace,
    angle_between,
    is_degenerate,
    normalize_command,
    project_to_sphere,
    simplex_points,
)

UNIT = CommandBounds()


class TestNormalize:
    def test_identity_bounds(self):
        np.testing.assert_array_equal(normalize_command([1, 0, -1], UNIT), [1, 0, -1])

    def test_linear_map(self):
        b = CommandBounds((-2, -2, -2), (2, 2, 2))
        np.testing.assert_allclose(normalize_command([1, 1, 0], b), [0.5, 0.5, 0])

    def test_affine_map(self):
        b = CommandBounds((0, -1, -1), (2, 1, 1))
        assert normalize_command([0.5, 0, 0], b)[0] == pytest.approx(-0.5)

    def test_out_of_bounds_names_dimension(self):
        with pytest.raises(CommandError, match="vy"):
            normalize_command([0, 1.5, 0], UNIT)

    def test_bounds_validation(self):
        with pytest.raises(CommandError, match="wz"):
            CommandBounds((-1, -1, 1), (1, 1, 1))

    def test_batch(self):
        out = normalize_command(np.array([[1, 0, -1], [0, 0, 0.5]]), UNIT)
        assert out.shape == (2, 3)


class TestProject:
    def test_already_unit(self):
        np.testing.assert_array_equal(project_to_sphere([1, 0, 0]), [1, 0, 0])

    def test_scaling(self):
        np.testing.assert_allclose(project_to_sphere([0.3, 0.4, 0]), [0.6, 0.8, 0])

    def test_origin_is_degenerate(self):
        with pytest.raises(DegenerateCommandError):
            project_to_sphere([0, 0, 0])

    def test_below_epsilon(self):
        with pytest.raises(DegenerateCommandError):
            project_to_sphere([0.03, 0.03, 0])
        assert is_degenerate([0.03, 0.03, 0], UNIT)
        assert not is_degenerate([0.05, 0, 0], UNIT)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
    def test_unit_norm_for_valid_commands(self, c):
        n = normalize_command(c, UNIT)
        if np.linalg.norm(n) < 0.05:
            return
        assert abs(np.linalg.norm(project_to_sphere(n)) - 1.0) <= 1e-12


class TestSimplex:
    def test_d1(self):
        np.testing.assert_array_equal(simplex_points(1), [[1.0], [-1.0]])

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 8])
    def test_geometry(self, d):
        v = simplex_points(d)
        assert v.shape == (d + 1, d)
        np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-9)
        gram = v @ v.T
        off = gram[~np.eye(d + 1, dtype=bool)]
        np.testing.assert_allclose(off, -1.0 / d, atol=1e-9)
        np.testing.assert_allclose(v.sum(axis=0), 0.0, atol=1e-12)

    def test_first_vertex_on_first_axis(self):
        assert simplex_points(3)[0].tolist() == [1.0, 0.0, 0.0]

    def test_deterministic(self):
        assert simplex_points(3).tobytes() == simplex_points(3).tobytes()

    def test_max_angle_d3(self):
        space = ObjectiveSpace(3)
        assert space.max_angle == pytest.approx(1.91063, abs=1e-5)
        assert abs(space.max_angle - np.arccos(-1 / 3)) < 1e-12

    @pytest.mark.parametrize("d", [0, -1, 1.5])
    def test_bad_dimension(self, d):
        with pytest.raises(CommandError):
            simplex_points(d)


class TestAngle:
    def test_same(self):
        assert angle_between([1, 0, 0], [1, 0, 0]) == 0.0

    def test_orthogonal(self):
        assert angle_between([1, 0, 0], [0, 1, 0]) == pytest.approx(np.pi / 2)

    def test_tetrahedron(self):
        v = simplex_points(3)
        assert angle_between(v[1], v[3]) == pytest.approx(np.arccos(-1 / 3), abs=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(CommandError):
            angle_between([2, 0, 0], [1, 0, 0])

    def test_clamps_rounding(self):
        u = np.array([1.0, 1e-9, 0])
        u /= np.linalg.norm(u)
        assert np.isfinite(angle_between(u, u))

    def test_symmetry_and_triangle_inequality(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(500, 3, 3))
        x /= np.linalg.norm(x, axis=-1, keepdims=True)
        a, b, c = x[:, 0], x[:, 1], x[:, 2]
        np.testing.assert_array_equal(angle_between(a, b), angle_between(b, a))
        assert np.all(angle_between(a, c) <= angle_between(a, b) + angle_between(b, c) + 1e-12)
