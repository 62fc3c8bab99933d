"""Tests for the subensemble model validator."""
from dataclasses import replace

import numpy as np
import pytest

from src.engine.generators import random_subensemble_model
from src.engine.grid import build_grid
from src.engine.validator import ModelValidator, ValidationLevel
from src.models.behavior import Behavior, SettingsSet
from src.models.polarization import CIRCULAR, DIAGONAL, HORIZONTAL


@pytest.fixture
def validator():
    return ModelValidator()


@pytest.fixture(scope="module")
def model():
    grid = build_grid(16, probes=1000)
    s = SettingsSet(alice=(HORIZONTAL, DIAGONAL), bob=(DIAGONAL, CIRCULAR))
    return random_subensemble_model(np.random.default_rng(71), s, grid, grid, n_pairs=6)


def _with(model, weights=None, conditionals=None, slack=None):
    return replace(
        model,
        weights=model.weights if weights is None else weights,
        conditionals=model.conditionals if conditionals is None else conditionals,
        slack=model.slack if slack is None else slack,
    )


class TestValidModels:
    """A generated model passes every check."""

    def test_all_green(self, validator, model):
        result = validator.validate(model, model.average())
        assert result.is_valid
        assert not result.has_warnings
        assert result.subensembles == 6
        assert len(result.metrics) == 7
        assert result.recommendations == []

    def test_without_behavior_skips_reconstruction(self, validator, model):
        result = validator.validate(model)
        assert "reconstruction" not in [m.metric_name for m in result.metrics]


class TestWeights:
    """Tests for the weight check."""

    def test_slightly_off_is_orange(self, validator, model):
        result = validator.validate(_with(model, weights=model.weights * (1.0 + 5e-10)))
        assert result.metric("weights").level == ValidationLevel.ORANGE
        assert result.has_warnings
        assert not result.has_errors

    def test_far_off_is_red(self, validator, model):
        result = validator.validate(_with(model, weights=model.weights * 1.01))
        assert result.metric("weights").level == ValidationLevel.RED
        assert len(result.recommendations) == 1


class TestSignalling:
    """Tests for the per-subensemble no-signalling checks."""

    def test_alice_marginal_depends_on_bob(self, validator, model):
        cond = model.conditionals.copy()
        cond[0, 0, 1, 0, 0] += 0.05
        cond[0, 0, 1, 1, 0] -= 0.05
        result = validator.validate(_with(model, conditionals=cond))
        assert result.metric("signalling_alice").level == ValidationLevel.RED
        assert result.metric("signalling_bob").is_ok
        assert result.metric("normalization").is_ok
        assert result.metric("malus_alice").level == ValidationLevel.RED


class TestMalus:
    """Tests for the Malus checks."""

    def test_slack_widens_limit(self, validator, model):
        cond = model.conditionals.copy()
        # move Bob's detection weight by 1e-3 in every (x, y) of pair 0, keeping tables normalized
        shift = 1e-3
        cond[0, :, :, 0, 0] += shift
        cond[0, :, :, 0, 1] -= shift
        cond[0, :, :, 1, 1] -= shift
        cond[0, :, :, 1, 0] += shift
        strict = validator.validate(_with(model, conditionals=cond))
        assert strict.metric("malus_bob").level == ValidationLevel.RED
        loose = validator.validate(_with(model, conditionals=cond, slack=2e-3))
        assert loose.metric("malus_bob").is_ok


class TestReconstruction:
    """Tests for the reconstruction check."""

    def test_other_behavior_is_red(self, validator, model):
        uniform = Behavior(np.full((2, 2, 2, 2), 0.25))
        assert validator.validate(model, uniform).metric("reconstruction").level == ValidationLevel.RED

    def test_shape_mismatch_is_red(self, validator, model):
        other = Behavior(np.full((1, 1, 2, 2), 0.25))
        result = validator.validate(model, other)
        assert result.metric("reconstruction").level == ValidationLevel.RED
        assert result.to_dict()["valid"] is False
