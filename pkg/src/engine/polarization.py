"""Polarizer effects and Malus probabilities."""
from __future__ import annotations

import numpy as np

from src.models.errors import ParameterRangeError
from src.models.matrix import CMatrix
from src.models.polarization import ImperfectPolarizer, PolarizationVector, PolarizerEffect

_I2 = np.eye(2, dtype=complex)


def _check_outcome(a: int) -> int:
    if a not in (0, 1):
        raise ParameterRangeError(f"outcome must be 0 or 1, got {a!r}")
    return a


def projector(z: PolarizationVector, a: int) -> PolarizerEffect:
    """Ideal effect a*I + (-1)^a |z><z|/<z|z>; a=0 is detection."""
    _check_outcome(a)
    proj = z.projector_matrix()
    matrix = proj if a == 0 else _I2 - proj
    return PolarizerEffect(direction=z, outcome=a, matrix=CMatrix(matrix))


def malus_probability(u: PolarizationVector, x: PolarizationVector, a: int) -> float:
    """tr(Pi^x_a |u><u|) for normalized u.

    The outcome-1 value is computed as 1 minus the outcome-0 value so the
    pair sums to one exactly.
    """
    _check_outcome(a)
    overlap = np.vdot(x.ket, u.ket)
    p0 = abs(overlap) ** 2 / (x.norm_sq * u.norm_sq)
    p0 = min(1.0, max(0.0, float(p0)))
    return p0 if a == 0 else 1.0 - p0


def imperfect_effect(p: ImperfectPolarizer, a: int) -> CMatrix:
    """Effect of a non-ideal polarizer.

    Outcome 0 is eps' I + (1 - eps) Pi_0; outcome 1 is its complement
    I - (outcome 0), unless the polarizer uses the symmetric reading, in which
    case both outcomes take the affine form (complete only for eps = 2 eps').
    """
    _check_outcome(a)
    detect = p.eps_prime * _I2 + (1.0 - p.eps) * projector(p.direction, 0).matrix.data
    if a == 0:
        return CMatrix(detect)
    if p.symmetric:
        return CMatrix(p.eps_prime * _I2 + (1.0 - p.eps) * projector(p.direction, 1).matrix.data)
    return CMatrix(_I2 - detect)


def effect_pair(direction: PolarizationVector, noise: tuple[float, float] | None = None) -> tuple[CMatrix, CMatrix]:
    """(outcome-0, outcome-1) effects, ideal when ``noise`` is None."""
    if noise is None:
        return projector(direction, 0).matrix, projector(direction, 1).matrix
    polarizer = ImperfectPolarizer(eps=noise[0], eps_prime=noise[1], direction=direction)
    return imperfect_effect(polarizer, 0), imperfect_effect(polarizer, 1)
