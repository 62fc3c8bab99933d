"""Named and random two-photon polarization states."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from src.engine.linalg import hermitian_eigensystem
from src.models.errors import ParameterRangeError, ShapeError
from src.models.matrix import CMatrix
from src.models.polarization import DensityMatrix, PolarizationVector

SPECTRAL_FLOOR = 1e-12

_S = 1.0 / math.sqrt(2.0)
BELL_KETS = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}


def pure_state(ket) -> DensityMatrix:
    k = np.asarray(ket, dtype=complex)
    k = k / np.linalg.norm(k)
    return DensityMatrix(CMatrix(np.outer(k, k.conj())))


def bell_state(name: str) -> DensityMatrix:
    try:
        return pure_state(BELL_KETS[name])
    except KeyError:
        raise ParameterRangeError(f"unknown Bell state {name!r} (choose from {sorted(BELL_KETS)})")


def singlet() -> DensityMatrix:
    """(|HV> - |VH>)/sqrt(2)."""
    return bell_state("psi-")


def werner(w: float) -> DensityMatrix:
    """w * singlet + (1 - w) I/4, a state for -1/3 <= w <= 1."""
    if not -1.0 / 3.0 - 1e-12 <= w <= 1.0 + 1e-12:
        raise ParameterRangeError(f"Werner parameter must lie in [-1/3, 1], got {w}")
    return DensityMatrix(CMatrix(w * singlet().data + (1.0 - w) * np.eye(4) / 4.0))


def product_state(u: PolarizationVector, v: PolarizationVector) -> DensityMatrix:
    """|u><u| (x) |v><v|."""
    return DensityMatrix(CMatrix(np.kron(u.projector_matrix(), v.projector_matrix())))


def random_direction(rng: np.random.Generator) -> PolarizationVector:
    """Uniform on the Poincare sphere."""
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    return PolarizationVector(c[0], c[1]).normalized()


def random_state(rng: np.random.Generator, dim: int = 4, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    if dim not in (2, 4):
        raise ShapeError(f"dimension must be 2 or 4, got {dim}")
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ParameterRangeError(f"rank must lie in [1, {dim}], got {rank}")
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(CMatrix(rho / np.trace(rho).real))


def random_separable(
    rng: np.random.Generator,
    terms: int = 4,
    directions: Optional[list[PolarizationVector]] = None,
) -> tuple[DensityMatrix, list[tuple[float, PolarizationVector, PolarizationVector]]]:
    """Random mixture of product states with its decomposition.

    With ``directions`` the local polarizations are drawn from that list.
    """
    weights = rng.dirichlet(np.ones(terms))
    parts = []
    for w in weights:
        if directions:
            u = directions[int(rng.integers(len(directions)))]
            v = directions[int(rng.integers(len(directions)))]
        else:
            u, v = random_direction(rng), random_direction(rng)
        parts.append((float(w), u, v))
    rho = sum(w * np.kron(u.projector_matrix(), v.projector_matrix()) for w, u, v in parts)
    return DensityMatrix(CMatrix(rho)), parts


def spectral_directions(rho: DensityMatrix) -> list[tuple[float, PolarizationVector]]:
    """Eigen-decomposition of a one-photon state as (weight, direction), zero weights dropped."""
    if rho.dim != 2:
        raise ShapeError(f"spectral_directions needs a one-photon state, got dimension {rho.dim}")
    out = []
    for value, vector in hermitian_eigensystem(rho):
        if value > SPECTRAL_FLOOR:
            out.append((value, PolarizationVector(vector[0], vector[1]).canonical()))
    total = sum(w for w, _ in out)
    return [(w / total, z) for w, z in out]
