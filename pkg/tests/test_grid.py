"""Tests for polarization grids and covering angles."""
import math

import numpy as np
import pytest

from src.config import DEFAULT_PROBES
from src.engine.grid import build_grid, certify_grid, covering_angle, extend_grid, fibonacci_angles, slack_bound
from src.engine.polarization import malus_probability
from src.engine.states import random_direction
from src.models.errors import InvalidVectorError, ParameterRangeError
from src.models.grid import PolarizationGrid, bloch_points
from src.models.polarization import CIRCULAR, DIAGONAL, HORIZONTAL, VERTICAL, PolarizationVector

OCTAHEDRON_COVER = math.acos(1.0 / math.sqrt(3.0))


def _grid(cover):
    return PolarizationGrid(angles=np.array([[0.0, 0.0]]), covering_angle=cover)


class TestFibonacci:
    """Tests for the Fibonacci lattice."""

    def test_includes_poles(self):
        angles = fibonacci_angles(7)
        assert angles[0].tolist() == [0.0, 0.0]
        assert angles[-1][0] == pytest.approx(math.pi)
        assert angles[-1][1] == 0.0

    def test_points_on_unit_sphere(self):
        pts = bloch_points(fibonacci_angles(50))
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


class TestBuildGrid:
    """Tests for build_grid."""

    def test_two_points(self):
        grid = build_grid(2, probes=2000)
        assert len(grid) == 2
        assert grid.covering_angle == pytest.approx(math.pi / 2, abs=1e-12)
        assert grid.index_of(HORIZONTAL) == 0
        assert grid.index_of(VERTICAL) == 1

    def test_six_points(self):
        grid = build_grid(6, probes=2000)
        assert OCTAHEDRON_COVER - 1e-12 <= grid.covering_angle < math.pi / 2

    def test_thousand_points(self):
        assert build_grid(1000).covering_angle < 0.15

    def test_refinement_shrinks_cover(self):
        assert build_grid(400, probes=2000).covering_angle < build_grid(50, probes=2000).covering_angle

    def test_too_small(self):
        with pytest.raises(ParameterRangeError):
            build_grid(1)

    def test_probes_never_exceed_exact_value(self):
        pts = bloch_points(fibonacci_angles(37))
        exact, _ = covering_angle(pts, probes=0)
        sampled, count = covering_angle(pts, probes=20000, seed=5)
        assert count == 20000
        assert sampled == pytest.approx(exact, abs=1e-12)

    def test_rounding_changes_malus_within_slack(self):
        """Moving a state to its nearest grid point changes any Malus value by at most the slack bound."""
        grid = build_grid(64, probes=5000)
        bound = slack_bound(grid)
        rng = np.random.default_rng(51)
        for _ in range(500):
            u, x = random_direction(rng), random_direction(rng)
            nearest = grid.points[int(np.argmax(grid.bloch @ u.bloch_vector()))]
            gap = abs(malus_probability(u, x, 0) - malus_probability(nearest, x, 0))
            assert gap <= bound + 1e-12


class TestSlackBound:
    """Tests for slack_bound."""

    def test_zero(self):
        assert slack_bound(_grid(0.0)) == 0.0

    def test_antipodal(self):
        assert slack_bound(_grid(math.pi)) == pytest.approx(1.0)

    def test_small_angle(self):
        assert slack_bound(_grid(0.2)) == pytest.approx(math.sin(0.1))

    def test_empirical_bound(self):
        """|tr(Pi (rho_u - rho_u'))| never exceeds sin(alpha/2) for Bloch angle alpha <= 0.2."""
        rng = np.random.default_rng(52)
        n = 100_000
        u = rng.normal(size=(n, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        tangent = np.cross(u, rng.normal(size=(n, 3)))
        tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
        alpha = rng.uniform(0.0, 0.2, size=n)
        v = np.cos(alpha)[:, None] * u + np.sin(alpha)[:, None] * tangent
        x = rng.normal(size=(n, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        # Malus probability of Bloch vector r behind direction x is (1 + x.r)/2
        gap = np.abs(np.einsum("ij,ij->i", x, u - v)) / 2.0
        assert np.all(gap <= slack_bound(_grid(0.2)) + 1e-15)


class TestPolarizationGrid:
    """Tests for the grid model."""

    def test_duplicates_rejected(self):
        with pytest.raises(InvalidVectorError):
            PolarizationGrid(angles=np.array([[0.5, 1.0], [0.5, 1.0]]), covering_angle=1.0)

    def test_kets_match_points(self):
        grid = build_grid(20, probes=1000)
        for i, z in enumerate(grid.points):
            assert np.allclose(grid.kets[i], z.ket)
            assert grid.index_of(z) == i

    def test_missing_point(self):
        assert build_grid(2, probes=1000).index_of(DIAGONAL) == -1

    def test_round_trip(self):
        grid = build_grid(30, probes=1000)
        loaded = PolarizationGrid.from_dict(grid.to_dict())
        assert np.array_equal(loaded.kets, grid.kets)
        assert loaded.covering_angle == grid.covering_angle
        assert loaded.probe_count == 1000


class TestExtendGrid:
    """Tests for point insertion."""

    def test_insert_circular(self):
        grid = build_grid(2, probes=1000).extended([CIRCULAR])
        assert len(grid) == 3
        assert grid.index_of(CIRCULAR) == 2
        assert grid.covering_angle == pytest.approx(math.pi / 2, abs=1e-12)

    def test_existing_points_skipped(self):
        grid = build_grid(2, probes=1000)
        assert extend_grid(grid, [HORIZONTAL, PolarizationVector(0, 2)]) is grid

    def test_octahedron(self):
        anti_diagonal = PolarizationVector(1, -1)
        anti_circular = PolarizationVector(1, -1j)
        grid = build_grid(2, probes=1000).extended([DIAGONAL, anti_diagonal, CIRCULAR, anti_circular])
        assert len(grid) == 6
        assert grid.covering_angle == pytest.approx(OCTAHEDRON_COVER, abs=1e-9)

    def test_inserted_points_reduce_cover(self):
        grid = build_grid(12, probes=2000)
        rng = np.random.default_rng(53)
        bigger = grid.extended([random_direction(rng) for _ in range(30)])
        assert len(bigger) == 42
        assert bigger.covering_angle <= grid.covering_angle + 1e-12

    def test_extending_unsampled_grid_samples_again(self):
        grid = PolarizationGrid(angles=fibonacci_angles(6), covering_angle=1.0)
        assert grid.extended([CIRCULAR]).probe_count == DEFAULT_PROBES


def _octahedron(cover):
    half = math.pi / 2
    angles = np.array([[0.0, 0.0], [math.pi, 0.0], [half, 0.0], [half, math.pi], [half, half], [half, -half]])
    return PolarizationGrid(angles=angles, covering_angle=cover)


class TestCoveringAngle:
    """Tests for the exact covering angle on degenerate point sets."""

    def test_arc_of_one_circle(self):
        pts = bloch_points(np.array([[0.0, 0.0], [math.pi / 6, 0.0], [math.pi / 3, 0.0]]))
        cover, _ = covering_angle(pts)
        assert cover == pytest.approx(5 * math.pi / 6, abs=1e-9)

    def test_two_close_points(self):
        pts = bloch_points(np.array([[0.0, 0.0], [math.pi / 2, 0.0]]))
        cover, _ = covering_angle(pts)
        assert cover == pytest.approx(3 * math.pi / 4, abs=1e-9)

    def test_cap_of_points(self):
        """Points clustered near one pole leave the opposite pole uncovered."""
        angles = np.array([[0.0, 0.0]] + [[0.2, k * math.pi / 3] for k in range(6)])
        cover, _ = covering_angle(bloch_points(angles))
        assert cover == pytest.approx(math.pi - 0.2, abs=1e-9)

    def test_matches_dense_sampling(self):
        rng = np.random.default_rng(54)
        pts = rng.normal(size=(9, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        exact, _ = covering_angle(pts, 0)
        sampled, _ = covering_angle(pts, 50_000, seed=3)
        assert sampled == pytest.approx(exact, abs=1e-12)


class TestCertifyGrid:
    """Tests for checking a declared covering angle against the points."""

    def test_understated_angle_replaced(self):
        grid = certify_grid(_octahedron(0.01))
        assert grid.covering_angle == pytest.approx(OCTAHEDRON_COVER, abs=1e-9)
        assert slack_bound(grid) == pytest.approx(math.sin(OCTAHEDRON_COVER / 2), abs=1e-9)

    def test_overstated_angle_kept(self):
        grid = _octahedron(1.2)
        assert certify_grid(grid) is grid

    def test_built_grid_unchanged(self):
        grid = build_grid(40)
        assert certify_grid(grid) is grid
