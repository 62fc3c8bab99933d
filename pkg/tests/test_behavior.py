"""Tests for settings, behaviors, no-signalling and Bell functionals."""
import math

import numpy as np
import pytest

from src.engine.behavior import bell_value, check_no_signalling, party_effects, quantum_behavior
from src.engine.states import product_state, random_state, singlet, werner
from src.models.behavior import Behavior, BellFunctional, SettingsSet
from src.models.errors import InvalidBehaviorError, InvalidStateError, ParameterRangeError, ShapeError
from src.models.polarization import HORIZONTAL, VERTICAL, DensityMatrix

CHSH_SETTINGS = SettingsSet.from_great_circle([0.0, math.pi / 2], [5 * math.pi / 4, 3 * math.pi / 4])


def _deterministic(n_alice=2, n_bob=2):
    table = np.zeros((n_alice, n_bob, 2, 2))
    table[:, :, 0, 0] = 1.0
    return Behavior(table)


class TestSettingsSet:
    """Tests for SettingsSet."""

    def test_needs_directions(self):
        with pytest.raises(ShapeError):
            SettingsSet(alice=(), bob=(HORIZONTAL,))

    def test_noise_length(self):
        with pytest.raises(ShapeError):
            SettingsSet(alice=(HORIZONTAL,), bob=(HORIZONTAL,), alice_noise=(None, None))

    def test_noise_range(self):
        with pytest.raises(ParameterRangeError):
            SettingsSet(alice=(HORIZONTAL,), bob=(HORIZONTAL,), bob_noise=((0.1, 0.3),))

    def test_round_trip_with_noise(self):
        s = SettingsSet(alice=(HORIZONTAL, VERTICAL), bob=(VERTICAL,), alice_noise=(None, (0.2, 0.1)))
        loaded = SettingsSet.from_dict(s.to_dict())
        assert loaded.alice == s.alice
        assert loaded.alice_noise == ((None), (0.2, 0.1))
        assert not loaded.is_ideal

    def test_effects_shape(self):
        assert party_effects(CHSH_SETTINGS, "A").shape == (2, 2, 2, 2)


class TestBehavior:
    """Tests for the Behavior model."""

    def test_negative_entry_rejected(self):
        table = np.full((1, 1, 2, 2), 0.25)
        table[0, 0, 0, 0] = 0.5
        table[0, 0, 1, 1] = -0.0001
        table[0, 0, 0, 1] = 0.2501
        with pytest.raises(InvalidBehaviorError):
            Behavior(table)

    def test_normalization_rejected(self):
        with pytest.raises(InvalidBehaviorError):
            Behavior(np.full((1, 1, 2, 2), 0.3))

    def test_tiny_negative_clamped(self):
        table = np.zeros((1, 1, 2, 2))
        table[0, 0, 0, 0] = 0.5 + 5e-13
        table[0, 0, 0, 1] = 0.5
        table[0, 0, 1, 0] = -5e-13
        b = Behavior(table)
        assert b.table.min() >= 0.0
        assert b.table.sum() == pytest.approx(1.0, abs=1e-15)

    def test_wrong_shape(self):
        with pytest.raises(ShapeError):
            Behavior(np.full((2, 2, 3), 0.25))

    def test_round_trip(self):
        b = quantum_behavior(singlet(), CHSH_SETTINGS)
        assert Behavior.from_dict(b.to_dict()).max_abs_diff(b) < 1e-15

    def test_declared_shape_checked(self):
        data = _deterministic().to_dict()
        data["nA"] = 3
        with pytest.raises(ShapeError):
            Behavior.from_dict(data)


class TestQuantumBehavior:
    """Tests for quantum_behavior."""

    def test_product_state(self):
        s = SettingsSet(alice=(HORIZONTAL,), bob=(HORIZONTAL,))
        b = quantum_behavior(product_state(HORIZONTAL, HORIZONTAL), s)
        assert b.p(0, 0, 0, 0) == pytest.approx(1.0)
        assert b.table.sum() == pytest.approx(1.0)

    def test_maximally_mixed_is_uniform(self):
        b = quantum_behavior(DensityMatrix.maximally_mixed(4), CHSH_SETTINGS)
        assert np.allclose(b.table, 0.25, atol=1e-15)

    def test_singlet_orthogonal_directions(self):
        s = SettingsSet.from_great_circle([0.0], [math.pi])
        assert quantum_behavior(singlet(), s).p(0, 0, 0, 0) == pytest.approx(0.5, abs=1e-12)

    def test_rejects_one_photon_state(self):
        with pytest.raises(ShapeError):
            quantum_behavior(DensityMatrix.maximally_mixed(2), CHSH_SETTINGS)

    def test_rejects_witness(self):
        w = DensityMatrix(singlet().matrix, witness=True)
        with pytest.raises(InvalidStateError):
            quantum_behavior(w, CHSH_SETTINGS)

    def test_imperfect_polarizers_blur_outcomes(self):
        s = SettingsSet(alice=(HORIZONTAL,), bob=(HORIZONTAL,), alice_noise=((0.2, 0.1),))
        b = quantum_behavior(product_state(HORIZONTAL, HORIZONTAL), s)
        assert b.p(0, 0, 0, 0) == pytest.approx(0.9)
        assert b.p(1, 0, 0, 0) == pytest.approx(0.1)


class TestNoSignalling:
    """Tests for check_no_signalling."""

    def test_quantum_behaviors_are_non_signalling(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            s = SettingsSet.from_great_circle(rng.uniform(0, 2 * math.pi, 3), rng.uniform(0, 2 * math.pi, 2))
            report = check_no_signalling(quantum_behavior(random_state(rng), s), 1e-10)
            assert report.ok
            assert report.max_violation <= 1e-10

    def test_constructed_signalling(self):
        table = np.zeros((1, 2, 2, 2))
        table[0, 0, 0, 0] = 1.0
        table[0, 1] = 0.25
        report = check_no_signalling(Behavior(table), 1e-10)
        assert not report.ok
        assert report.max_violation == pytest.approx(0.5)
        assert report.worst_indices["party"] == "A"


class TestBellValue:
    """Tests for Bell functionals."""

    def test_deterministic_local(self):
        assert bell_value(_deterministic(), BellFunctional.chsh()) == pytest.approx(2.0)

    def test_singlet_tsirelson(self):
        value = bell_value(quantum_behavior(singlet(), CHSH_SETTINGS), BellFunctional.chsh())
        assert value == pytest.approx(2 * math.sqrt(2), abs=1e-9)

    def test_maximally_mixed(self):
        b = quantum_behavior(DensityMatrix.maximally_mixed(4), CHSH_SETTINGS)
        assert bell_value(b, BellFunctional.chsh()) == pytest.approx(0.0, abs=1e-12)

    def test_werner_scales_linearly(self):
        b = quantum_behavior(werner(0.5), CHSH_SETTINGS)
        assert bell_value(b, BellFunctional.chsh()) == pytest.approx(math.sqrt(2), abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            bell_value(_deterministic(3, 2), BellFunctional.chsh())

    def test_functional_round_trip(self):
        f = BellFunctional(np.ones((1, 2, 2, 2)), name="custom")
        loaded = BellFunctional.from_dict(f.to_dict())
        assert loaded.name == "custom"
        assert np.array_equal(loaded.coefficients, f.coefficients)
        assert BellFunctional.from_dict({"builtin": "chsh"}).name == "chsh"
