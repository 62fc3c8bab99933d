"""Tests for polarization vectors, polarizer effects and density matrices."""
import math

import numpy as np
import pytest

from src.engine.polarization import effect_pair, imperfect_effect, malus_probability, projector
from src.engine.states import random_direction
from src.models.errors import InvalidStateError, InvalidVectorError, ParameterRangeError, ShapeError
from src.models.matrix import CMatrix
from src.models.polarization import (
    CIRCULAR,
    DIAGONAL,
    HORIZONTAL,
    VERTICAL,
    DensityMatrix,
    ImperfectPolarizer,
    PolarizationVector,
)


class TestPolarizationVector:
    """Tests for the PolarizationVector model."""

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidVectorError):
            PolarizationVector(0, 0)

    def test_tiny_vector_rejected(self):
        with pytest.raises(InvalidVectorError):
            PolarizationVector(1e-7, 0)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidVectorError):
            PolarizationVector(float("nan"), 1)

    def test_unnormalized_is_legal(self):
        z = PolarizationVector(2, 0)
        assert z.norm_sq == 4.0
        assert np.allclose(z.projector_matrix(), [[1, 0], [0, 0]])

    def test_bloch_vectors(self):
        assert np.allclose(HORIZONTAL.bloch_vector(), [0, 0, 1])
        assert np.allclose(VERTICAL.bloch_vector(), [0, 0, -1])
        assert np.allclose(DIAGONAL.bloch_vector(), [1, 0, 0])
        assert np.allclose(CIRCULAR.bloch_vector(), [0, 1, 0])

    def test_bloch_chart_round_trip(self):
        z = PolarizationVector.from_bloch(1.1, 2.3)
        theta, phi = z.bloch_angles()
        assert theta == pytest.approx(1.1)
        assert phi == pytest.approx(2.3)

    def test_great_circle(self):
        z = PolarizationVector.from_great_circle(math.pi / 2)
        assert np.allclose(z.bloch_vector(), [1, 0, 0])

    def test_canonical_phase(self):
        z = PolarizationVector(-1j, 1j).canonical()
        assert z.c0.imag == 0.0
        assert z.c0.real > 0
        assert z.norm_sq == pytest.approx(1.0)

    def test_from_dict_forms(self):
        assert PolarizationVector.from_dict({"c0": [1, 0], "c1": [0, 0]}) == HORIZONTAL
        z = PolarizationVector.from_dict({"bloch": [math.pi, 0]})
        assert np.allclose(z.bloch_vector(), [0, 0, -1])
        g = PolarizationVector.from_dict({"greatCircle": math.pi / 2})
        assert np.allclose(g.bloch_vector(), [1, 0, 0])

    def test_from_dict_missing_amplitude(self):
        with pytest.raises(InvalidVectorError):
            PolarizationVector.from_dict({"c0": [1, 0]})

    def test_to_dict_round_trip(self):
        z = PolarizationVector(0.3 + 0.1j, -0.7j)
        assert PolarizationVector.from_dict(z.to_dict()) == z


class TestProjector:
    """Tests for ideal polarizer effects."""

    def test_horizontal_detection(self):
        assert projector(PolarizationVector(1, 0), 0).matrix == CMatrix.diag(1, 0)

    def test_normalization_by_norm(self):
        assert projector(PolarizationVector(2, 0), 0).matrix.max_abs_diff(CMatrix.diag(1, 0)) < 1e-15

    def test_diagonal_complement(self):
        m = projector(DIAGONAL, 1).matrix
        assert np.allclose(m.data, [[0.5, -0.5], [-0.5, 0.5]])

    def test_outcomes_sum_to_identity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            z = random_direction(rng)
            total = projector(z, 0).matrix + projector(z, 1).matrix
            assert total.max_abs_diff(CMatrix.identity(2)) < 1e-12

    def test_invalid_outcome(self):
        with pytest.raises(ParameterRangeError):
            projector(HORIZONTAL, 2)


class TestMalus:
    """Tests for Malus probabilities."""

    def test_orthogonal(self):
        assert malus_probability(HORIZONTAL, VERTICAL, 0) == 0.0

    def test_diagonal(self):
        assert malus_probability(HORIZONTAL, DIAGONAL, 0) == pytest.approx(0.5)

    def test_circular_against_linear(self):
        assert malus_probability(CIRCULAR, HORIZONTAL, 0) == pytest.approx(0.5)

    def test_outcomes_sum_to_one_exactly(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            u, x = random_direction(rng), random_direction(rng)
            assert malus_probability(u, x, 0) + malus_probability(u, x, 1) == 1.0

    def test_unnormalized_inputs(self):
        u = PolarizationVector(3, 3)
        assert malus_probability(u, PolarizationVector(5, 0), 0) == pytest.approx(0.5)


class TestImperfectPolarizer:
    """Tests for non-ideal polarizer effects."""

    def test_reduces_to_ideal(self):
        p = ImperfectPolarizer(eps=0.0, eps_prime=0.0, direction=DIAGONAL)
        assert imperfect_effect(p, 0).max_abs_diff(projector(DIAGONAL, 0).matrix) < 1e-15
        assert imperfect_effect(p, 1).max_abs_diff(projector(DIAGONAL, 1).matrix) < 1e-15

    def test_detection_effect(self):
        p = ImperfectPolarizer(eps=0.2, eps_prime=0.1, direction=HORIZONTAL)
        assert imperfect_effect(p, 0).max_abs_diff(CMatrix.diag(0.9, 0.1)) < 1e-15

    def test_complement_effect(self):
        p = ImperfectPolarizer(eps=0.2, eps_prime=0.1, direction=HORIZONTAL)
        assert imperfect_effect(p, 1).max_abs_diff(CMatrix.diag(0.1, 0.9)) < 1e-15

    def test_symmetric_reading(self):
        p = ImperfectPolarizer(eps=0.2, eps_prime=0.1, direction=HORIZONTAL, symmetric=True)
        total = imperfect_effect(p, 0) + imperfect_effect(p, 1)
        assert total.max_abs_diff(CMatrix.identity(2)) < 1e-15

    def test_symmetric_needs_matching_parameters(self):
        with pytest.raises(ParameterRangeError):
            ImperfectPolarizer(eps=0.3, eps_prime=0.1, direction=HORIZONTAL, symmetric=True)

    @pytest.mark.parametrize("eps, eps_prime", [(0.1, 0.2), (1.0, 0.0), (0.1, -0.01)])
    def test_parameter_range(self, eps, eps_prime):
        with pytest.raises(ParameterRangeError):
            ImperfectPolarizer(eps=eps, eps_prime=eps_prime, direction=HORIZONTAL)

    def test_effects_are_positive(self):
        e0, e1 = effect_pair(DIAGONAL, (0.3, 0.05))
        assert np.linalg.eigvalsh(e0.data).min() >= 0.0
        assert np.linalg.eigvalsh(e1.data).min() >= 0.0


class TestDensityMatrix:
    """Tests for density matrix validation."""

    def test_maximally_mixed(self):
        assert DensityMatrix.maximally_mixed(4).matrix.trace().real == pytest.approx(1.0)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ShapeError):
            DensityMatrix.from_array([[0.5, 0.1], [0.0, 0.5]])

    def test_wrong_trace_rejected(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix.from_array([[0.5, 0.0], [0.0, 0.6]])

    def test_negative_rejected(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix.from_array([[1.2, 0.0], [0.0, -0.2]])

    def test_witness_skips_positivity(self):
        w = DensityMatrix.from_array([[1.2, 0.0], [0.0, -0.2]], witness=True)
        assert w.witness
        assert DensityMatrix.from_dict(w.to_dict()).witness

    def test_round_trip(self):
        rho = DensityMatrix.pure(DIAGONAL)
        assert DensityMatrix.from_dict(rho.to_dict()).matrix.max_abs_diff(rho.matrix) < 1e-15
