"""Two-qubit separability: PPT decisions, witnesses and separable constructions."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.engine.behavior import party_effects
from src.engine.linalg import hermitian_eigensystem, partial_transpose
from src.models.behavior import BellFunctional, SettingsSet
from src.models.errors import InvalidStateError, ParameterRangeError, ShapeError
from src.models.matrix import CMatrix
from src.models.polarization import DensityMatrix, PolarizationVector
from src.models.subensemble import SubensembleModel

logger = logging.getLogger(__name__)

BOUNDARY_BAND = 1e-10
WEIGHT_TOL = 1e-10


@dataclass
class SeparabilityVerdict:
    """PPT verdict; states within the boundary band count as separable and are flagged."""

    separable: bool
    min_partial_transpose_eigenvalue: float
    boundary: bool = False
    witness: Optional[CMatrix] = None
    witness_value: Optional[float] = None

    @property
    def label(self) -> str:
        if self.boundary:
            return "boundary"
        return "separable" if self.separable else "entangled"

    def to_dict(self) -> dict:
        data = {
            "verdict": self.label,
            "separable": self.separable,
            "minPartialTransposeEigenvalue": self.min_partial_transpose_eigenvalue,
        }
        if self.witness_value is not None:
            data["witnessValue"] = self.witness_value
        return data


def _require_state(rho: DensityMatrix) -> None:
    if rho.dim != 4:
        raise ShapeError(f"expected a two-qubit state, got dimension {rho.dim}")
    if rho.witness:
        raise InvalidStateError("expected a state, got a witness")


def ppt_witness(rho: DensityMatrix) -> CMatrix:
    """W = (|e><e|)^{T_B} for the lowest eigenvector e of rho^{T_B}; tr(W rho) is that eigenvalue."""
    _require_state(rho)
    _, vector = hermitian_eigensystem(partial_transpose(rho))[0]
    return partial_transpose(CMatrix(np.outer(vector, vector.conj())))


def ppt_check(rho: DensityMatrix) -> SeparabilityVerdict:
    """Exact two-qubit separability from the spectrum of the partial transpose."""
    _require_state(rho)
    lowest, vector = hermitian_eigensystem(partial_transpose(rho))[0]
    boundary = abs(lowest) <= BOUNDARY_BAND
    separable = lowest >= -BOUNDARY_BAND
    verdict = SeparabilityVerdict(separable=separable, min_partial_transpose_eigenvalue=lowest, boundary=boundary)
    if not separable:
        verdict.witness = partial_transpose(CMatrix(np.outer(vector, vector.conj())))
        verdict.witness_value = witness_value(verdict.witness, rho)
        logger.debug("Entangled: min partial-transpose eigenvalue %.6g", lowest)
    return verdict


def witness_value(w: Union[CMatrix, DensityMatrix], rho: DensityMatrix) -> float:
    """tr(W rho)."""
    mat = w.matrix if isinstance(w, DensityMatrix) else w
    if mat.dim != rho.dim:
        raise ShapeError(f"witness dimension {mat.dim} does not match state dimension {rho.dim}")
    if not mat.is_hermitian():
        raise ShapeError("witness must be Hermitian")
    return float(np.real(np.trace(mat.data @ rho.data)))


def separable_from_weights(weights) -> DensityMatrix:
    """sum P(u,v) |u><u| (x) |v><v| from (weight, u, v) triples or a SubensembleModel."""
    if isinstance(weights, SubensembleModel):
        weights = [(float(w), weights.u(k), weights.v(k)) for k, w in enumerate(weights.weights)]
    terms: list[tuple[float, PolarizationVector, PolarizationVector]] = list(weights)
    if not terms:
        raise ParameterRangeError("need at least one weighted pair")
    values = np.array([w for w, _, _ in terms], dtype=float)
    if np.any(values < -WEIGHT_TOL):
        raise ParameterRangeError(f"negative weight {values.min():.3g}")
    if abs(values.sum() - 1.0) > WEIGHT_TOL:
        raise ParameterRangeError(f"weights sum to {values.sum():.12g}, not 1")
    values = np.clip(values, 0.0, None)
    values /= values.sum()
    rho = sum(w * np.kron(u.projector_matrix(), v.projector_matrix()) for w, (_, u, v) in zip(values, terms))
    return DensityMatrix(CMatrix(rho))


def chsh_operator(s: SettingsSet, f: Optional[BellFunctional] = None) -> CMatrix:
    """Bell operator sum c[x,y,a,b] E^x_a (x) E^y_b; tr(B rho) equals the functional's value."""
    f = f or BellFunctional.chsh()
    if f.shape != (s.n_alice, s.n_bob):
        raise ShapeError(f"functional has {f.shape} settings, settings have {(s.n_alice, s.n_bob)}")
    ea = party_effects(s, "A")
    eb = party_effects(s, "B")
    op = np.einsum("xyab,xaij,ybkl->ikjl", f.coefficients, ea, eb).reshape(4, 4)
    return CMatrix((op + op.conj().T) / 2.0)
