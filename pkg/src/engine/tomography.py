"""Single-photon state tomography with non-ideal polarizers.

Each record gives a polarizer direction, its (eps, eps') response and the
observed detection frequency p = eps' + (1 - eps) tr(rho Pi_0). The affine
correction is undone and the Bloch parameters are recovered by least squares.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.engine.polarization import imperfect_effect
from src.models.errors import (
    InconsistentStatisticsError,
    NotTomographicallyCompleteError,
    ParameterRangeError,
)
from src.models.matrix import CMatrix
from src.models.polarization import DensityMatrix, ImperfectPolarizer, PolarizationVector

logger = logging.getLogger(__name__)

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

PSD_REPAIR_TOL = 1e-6


@dataclass(frozen=True)
class TomographyRecord:
    """One measured direction."""

    direction: PolarizationVector
    eps: float
    eps_prime: float
    freq: float

    def __post_init__(self):
        if not (0.0 <= self.eps_prime <= self.eps < 1.0):
            raise ParameterRangeError(
                f"need 0 <= eps' <= eps < 1, got eps={self.eps}, eps'={self.eps_prime}"
            )

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.to_dict(),
            "eps": self.eps,
            "epsPrime": self.eps_prime,
            "freq": self.freq,
        }

    @classmethod
    def from_dict(cls, data: dict) -> TomographyRecord:
        return cls(
            direction=PolarizationVector.from_dict(data["direction"]),
            eps=float(data.get("eps", 0.0)),
            eps_prime=float(data.get("epsPrime", 0.0)),
            freq=float(data["freq"]),
        )


def simulate_statistics(
    rho: DensityMatrix,
    directions: list[PolarizationVector],
    eps: float = 0.0,
    eps_prime: float = 0.0,
) -> list[TomographyRecord]:
    """Exact detection frequencies of ``rho`` behind non-ideal polarizers."""
    records = []
    for z in directions:
        effect = imperfect_effect(ImperfectPolarizer(eps=eps, eps_prime=eps_prime, direction=z), 0)
        freq = float(np.real(np.trace(effect.data @ rho.data)))
        records.append(TomographyRecord(direction=z, eps=eps, eps_prime=eps_prime, freq=freq))
    return records


def _nearest_state(h: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh((h + h.conj().T) / 2.0)
    if values[0] < -PSD_REPAIR_TOL:
        raise InconsistentStatisticsError(
            f"reconstruction has eigenvalue {values[0]:.3g}, statistics are not from a state"
        )
    if values[0] < 0.0:
        logger.info("Projecting reconstruction onto the state space (min eigenvalue %.3g)", values[0])
    clipped = np.clip(values, 0.0, None)
    clipped /= clipped.sum()
    return (vectors * clipped) @ vectors.conj().T


def tomographic_reconstruct(stats: list[TomographyRecord]) -> DensityMatrix:
    """Linear-inversion estimate of a qubit state from detection frequencies.

    The trace is fixed at 1 and only the Bloch vector is fitted, so redundant
    or mutually inconsistent records still give a unit-trace estimate.
    """
    if not stats:
        raise NotTomographicallyCompleteError("no measurement records")

    # rho = (I + h1 X + h2 Y + h3 Z) / 2, so tr(rho P) = 1/2 + sum_i h_i tr(P sigma_i) / 2
    rows = []
    rhs = []
    for rec in stats:
        ideal = (rec.freq - rec.eps_prime) / (1.0 - rec.eps)
        proj = rec.direction.projector_matrix()
        rows.append([float(np.real(np.trace(proj @ p))) / 2.0 for p in _PAULI[1:]])
        rhs.append(ideal - 0.5)
    design = np.array(rows)
    rank = np.linalg.matrix_rank(design, tol=1e-9)
    if rank < 3:
        raise NotTomographicallyCompleteError(
            f"directions span only {rank} of 3 Bloch axes; not tomographically complete"
        )
    h, *_ = np.linalg.lstsq(design, np.array(rhs), rcond=None)
    estimate = (_PAULI[0] + sum(coef * p for coef, p in zip(h, _PAULI[1:]))) / 2.0
    return DensityMatrix(CMatrix(_nearest_state(estimate)))
