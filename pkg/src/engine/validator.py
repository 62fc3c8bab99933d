"""Subensemble model validation.

Checks a SubensembleModel against the invariants every crypto-nonlocal model
must satisfy and produces a traffic-light result (green/orange/red) per
metric.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from src.engine.crypto_nonlocal import local_response
from src.models.behavior import Behavior
from src.models.subensemble import SubensembleModel


class ValidationLevel(Enum):
    """Traffic light validation levels."""
    GREEN = "green"    # Within tolerance
    ORANGE = "orange"  # Within 10x the tolerance
    RED = "red"        # Violated


@dataclass
class MetricValidation:
    """Validation result for a single metric."""

    metric_name: str
    display_name: str
    value: float
    limit: float
    level: ValidationLevel = ValidationLevel.GREEN
    message: str = ""

    @property
    def is_ok(self) -> bool:
        return self.level == ValidationLevel.GREEN

    def to_dict(self) -> dict:
        return {"metric": self.metric_name, "value": self.value, "limit": self.limit, "level": self.level.value}


@dataclass
class ValidationResult:
    """Full validation result for a model."""

    subensembles: int = 0
    metrics: list[MetricValidation] = field(default_factory=list)
    recommendations: list[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        """True if all metrics are green."""
        return all(m.is_ok for m in self.metrics)

    @property
    def has_warnings(self) -> bool:
        return any(m.level == ValidationLevel.ORANGE for m in self.metrics)

    @property
    def has_errors(self) -> bool:
        return any(m.level == ValidationLevel.RED for m in self.metrics)

    def metric(self, name: str) -> MetricValidation:
        return next(m for m in self.metrics if m.metric_name == name)

    def to_dict(self) -> dict:
        return {"valid": self.is_valid, "subensembles": self.subensembles,
                "metrics": [m.to_dict() for m in self.metrics]}


_MESSAGES = {
    "weights": "Los pesos P(u,v) no suman 1 o son negativos.",
    "normalization": "Alguna tabla condicional no está normalizada para un par (x,y).",
    "signalling_alice": "El marginal de Alice en un subensamble depende del ajuste de Bob.",
    "signalling_bob": "El marginal de Bob en un subensamble depende del ajuste de Alice.",
    "malus_alice": "Los marginales de Alice no siguen la ley de Malus dentro de la holgura declarada.",
    "malus_bob": "Los marginales de Bob no siguen la ley de Malus dentro de la holgura declarada.",
    "reconstruction": "El promedio del modelo no reproduce el comportamiento de entrada.",
}

NORMALIZATION_TOL = 1e-10
SIGNALLING_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8


class ModelValidator:
    """Validates subensemble models against their structural invariants."""

    def validate(self, model: SubensembleModel, behavior: Optional[Behavior] = None) -> ValidationResult:
        """Validate ``model``; with a behavior, also check that the model averages to it."""
        result = ValidationResult(subensembles=len(model))
        cond = model.conditionals
        s = model.settings

        weight_gap = max(abs(float(model.weights.sum()) - 1.0), float(np.max(-model.weights, initial=0.0)))
        norm_gap = float(np.max(np.abs(cond.sum(axis=(3, 4)) - 1.0), initial=0.0))
        alice = model.alice_marginals()  # (K, nA, nB, 2)
        bob = model.bob_marginals()
        sig_a = float(np.max(alice.max(axis=2) - alice.min(axis=2), initial=0.0))
        sig_b = float(np.max(bob.max(axis=1) - bob.min(axis=1), initial=0.0))

        resp_u = local_response(model.grid_u, s, "A")[model.pairs[:, 0]]  # (K, nA)
        resp_v = local_response(model.grid_v, s, "B")[model.pairs[:, 1]]
        malus_a = float(np.max(np.abs(alice[..., 0] - resp_u[:, :, None]), initial=0.0))
        malus_b = float(np.max(np.abs(bob[..., 0] - resp_v[:, None, :]), initial=0.0))

        checks = [
            ("weights", "Pesos", weight_gap, NORMALIZATION_TOL),
            ("normalization", "Normalización", norm_gap, NORMALIZATION_TOL),
            ("signalling_alice", "No señalización (Alice)", sig_a, SIGNALLING_TOL),
            ("signalling_bob", "No señalización (Bob)", sig_b, SIGNALLING_TOL),
            ("malus_alice", "Malus (Alice)", malus_a, model.slack + NORMALIZATION_TOL),
            ("malus_bob", "Malus (Bob)", malus_b, model.slack + NORMALIZATION_TOL),
        ]
        if behavior is not None:
            recon = np.einsum("k,kxyab->xyab", model.weights, cond)
            gap = float(np.max(np.abs(recon - behavior.table))) if recon.shape == behavior.table.shape else np.inf
            checks.append(("reconstruction", "Reconstrucción", gap, RECONSTRUCTION_TOL))

        for metric_key, display_name, value, limit in checks:
            mv = self._validate_metric(metric_key, display_name, value, limit)
            result.metrics.append(mv)
            if not mv.is_ok and mv.message:
                result.recommendations.append(mv.message)
        return result

    def _validate_metric(self, metric_key: str, display_name: str, value: float, limit: float) -> MetricValidation:
        """Validate a single deviation against its limit."""
        mv = MetricValidation(metric_name=metric_key, display_name=display_name, value=value, limit=limit)
        if value <= limit:
            mv.level = ValidationLevel.GREEN
        elif value <= 10.0 * limit:
            mv.level = ValidationLevel.ORANGE
            mv.message = _MESSAGES.get(metric_key, f"{display_name} ligeramente fuera de tolerancia.")
        else:
            mv.level = ValidationLevel.RED
            mv.message = _MESSAGES.get(metric_key, f"{display_name} fuera de tolerancia.")
        return mv
