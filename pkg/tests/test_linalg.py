"""Tests for the complex matrix kernel."""
import math

import numpy as np
import pytest

from src.engine.linalg import (
    Side,
    eigenvalues,
    hermitian_eigensystem,
    partial_trace,
    partial_transpose,
    tensor_product,
    trace_distance,
)
from src.engine.states import singlet
from src.models.errors import ShapeError
from src.models.matrix import CMatrix
from src.models.polarization import DensityMatrix, PolarizationVector

PAULI_X = CMatrix(np.array([[0, 1], [1, 0]]))
PAULI_Z = CMatrix.diag(1, -1)


def _random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return CMatrix((a + a.conj().T) / 2.0)


def _random_state(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = a @ a.conj().T
    return m / np.trace(m).real


class TestCMatrix:
    """Tests for the matrix value type."""

    def test_rejects_wrong_dimension(self):
        with pytest.raises(ShapeError):
            CMatrix(np.eye(3))

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            CMatrix(np.zeros((2, 4)))

    def test_is_immutable(self):
        m = CMatrix.identity(2)
        with pytest.raises(ValueError):
            m.data[0, 0] = 5.0

    def test_mismatched_addition(self):
        with pytest.raises(ShapeError):
            CMatrix.identity(2) + CMatrix.identity(4)

    def test_round_trip_dict(self):
        m = CMatrix(np.array([[1, 2j], [-2j, 3]]))
        assert CMatrix.from_dict(m.to_dict()) == m

    def test_nested_entries_accepted(self):
        data = {"dim": 2, "entries": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
        assert CMatrix.from_dict(data) == CMatrix.diag(1, 0)


class TestEigensystem:
    """Tests for Hermitian eigen-decomposition."""

    def test_identity(self):
        assert np.allclose(eigenvalues(CMatrix.identity(2)), [1.0, 1.0])

    def test_diagonal(self):
        system = hermitian_eigensystem(CMatrix.diag(0.1, 0.9))
        assert system[0][0] == pytest.approx(0.1)
        assert system[1][0] == pytest.approx(0.9)
        assert abs(system[0][1][0]) == pytest.approx(1.0)
        assert abs(system[1][1][1]) == pytest.approx(1.0)

    def test_pauli_x(self):
        assert np.allclose(eigenvalues(PAULI_X), [-1.0, 1.0])

    def test_rejects_non_hermitian(self):
        with pytest.raises(ShapeError):
            hermitian_eigensystem(CMatrix(np.array([[0, 1], [0, 0]])))

    def test_reconstruction_on_random_matrices(self):
        """sum lambda v v^dagger reproduces the input and the vectors are orthonormal."""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            dim = 2 if rng.random() < 0.5 else 4
            m = _random_hermitian(rng, dim)
            system = hermitian_eigensystem(m)
            vectors = np.array([v for _, v in system]).T
            recon = sum(value * np.outer(v, v.conj()) for value, v in system)
            assert np.max(np.abs(recon - m.data)) <= 1e-10
            assert np.max(np.abs(vectors.conj().T @ vectors - np.eye(dim))) <= 1e-10
            values = [value for value, _ in system]
            assert values == sorted(values)


class TestTensorProduct:
    """Tests for Kronecker products."""

    def test_identities(self):
        assert tensor_product(CMatrix.identity(2), CMatrix.identity(2)).max_abs_diff(CMatrix.identity(4)) == 0.0

    def test_projectors(self):
        result = tensor_product(CMatrix.diag(1, 0), CMatrix.diag(1, 0))
        assert result == CMatrix.diag(1, 0, 0, 0)

    def test_pauli_z(self):
        assert tensor_product(PAULI_Z, PAULI_Z) == CMatrix.diag(1, -1, -1, 1)

    def test_rejects_4x4(self):
        with pytest.raises(ShapeError):
            tensor_product(CMatrix.identity(4), CMatrix.identity(2))


class TestPartialOperations:
    """Tests for partial trace and partial transpose."""

    def test_trace_of_maximally_mixed(self):
        reduced = partial_trace(DensityMatrix.maximally_mixed(4), Side.B)
        assert reduced.max_abs_diff(CMatrix.identity(2) * 0.5) < 1e-15

    def test_trace_of_product(self):
        rng = np.random.default_rng(3)
        rho, sigma = CMatrix(_random_state(rng)), CMatrix(_random_state(rng))
        product = tensor_product(rho, sigma)
        assert partial_trace(product, Side.B).max_abs_diff(sigma) < 1e-12
        assert partial_trace(product, Side.A).max_abs_diff(rho) < 1e-12

    def test_trace_of_singlet(self):
        assert partial_trace(singlet(), Side.B).max_abs_diff(CMatrix.identity(2) * 0.5) < 1e-15
        assert partial_trace(singlet(), Side.A).max_abs_diff(CMatrix.identity(2) * 0.5) < 1e-15

    def test_transpose_of_diagonal(self):
        d = CMatrix.diag(0.1, 0.2, 0.3, 0.4)
        assert partial_transpose(d) == d

    def test_transpose_of_product(self):
        rng = np.random.default_rng(4)
        rho, sigma = _random_state(rng), _random_state(rng)
        expected = tensor_product(CMatrix(rho), CMatrix(sigma.T))
        assert partial_transpose(tensor_product(CMatrix(rho), CMatrix(sigma))).max_abs_diff(expected) < 1e-12

    def test_transpose_is_involution(self):
        m = _random_hermitian(np.random.default_rng(5), 4)
        assert partial_transpose(partial_transpose(m)) == m

    def test_singlet_has_negative_partial_transpose(self):
        assert eigenvalues(partial_transpose(singlet()))[0] == pytest.approx(-0.5, abs=1e-12)

    def test_requires_two_qubits(self):
        with pytest.raises(ShapeError):
            partial_transpose(CMatrix.identity(2))


class TestTraceDistance:
    """Tests for trace distance."""

    def test_same_state(self):
        rho = DensityMatrix.maximally_mixed(2)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        h = DensityMatrix.pure(PolarizationVector(1, 0))
        v = DensityMatrix.pure(PolarizationVector(0, 1))
        assert trace_distance(h, v) == pytest.approx(1.0)

    def test_pure_states_at_bloch_angle(self):
        for alpha in (0.3, math.pi / 2, 2.0):
            a = DensityMatrix.pure(PolarizationVector.from_bloch(0.0))
            b = DensityMatrix.pure(PolarizationVector.from_bloch(alpha))
            assert trace_distance(a, b) == pytest.approx(math.sin(alpha / 2.0), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            trace_distance(DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(4))
