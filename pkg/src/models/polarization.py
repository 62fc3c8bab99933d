"""Photon polarization data models."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.models.errors import (
    InvalidStateError,
    InvalidVectorError,
    ParameterRangeError,
    ShapeError,
)
from src.models.matrix import CMatrix

MIN_NORM_SQ = 1e-12
STATE_TOL = 1e-10


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _complex(value, field: str) -> complex:
    try:
        re, im = value
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise InvalidVectorError(f"{field} must be a [re, im] pair, got {value!r}")


@dataclass(frozen=True)
class PolarizationVector:
    """A polarization direction |z> = c0|H> + c1|V>.

    Unnormalized vectors are legal; everything that needs a unit vector
    normalizes by <z|z>.
    """

    c0: complex
    c1: complex

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))
        if not (math.isfinite(self.c0.real) and math.isfinite(self.c0.imag)
                and math.isfinite(self.c1.real) and math.isfinite(self.c1.imag)):
            raise InvalidVectorError("polarization amplitudes must be finite")
        if self.norm_sq <= MIN_NORM_SQ:
            raise InvalidVectorError(f"polarization vector too close to zero (<z|z> = {self.norm_sq:.3g})")

    @property
    def norm_sq(self) -> float:
        return abs(self.c0) ** 2 + abs(self.c1) ** 2

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)

    def normalized(self) -> PolarizationVector:
        n = math.sqrt(self.norm_sq)
        return PolarizationVector(self.c0 / n, self.c1 / n)

    def canonical(self) -> PolarizationVector:
        """Unit norm with the first nonzero amplitude real and non-negative."""
        unit = self.normalized()
        lead = unit.c0 if abs(unit.c0) > 1e-15 else unit.c1
        phase = lead / abs(lead)
        c0 = unit.c0 / phase
        c1 = unit.c1 / phase
        if abs(unit.c0) > 1e-15:
            c0 = complex(abs(unit.c0), 0.0)
        else:
            c1 = complex(abs(unit.c1), 0.0)
        return PolarizationVector(c0, c1)

    def projector_matrix(self) -> np.ndarray:
        """|z><z| / <z|z> as a 2x2 array."""
        k = self.ket
        return np.outer(k, k.conj()) / self.norm_sq

    def bloch_vector(self) -> np.ndarray:
        """Point on the Poincare sphere, (<X>, <Y>, <Z>)."""
        unit = self.normalized()
        cross = unit.c0.conjugate() * unit.c1
        return np.array([
            2.0 * cross.real,
            2.0 * cross.imag,
            abs(unit.c0) ** 2 - abs(unit.c1) ** 2,
        ])

    def bloch_angles(self) -> tuple[float, float]:
        """(theta, phi) in the chart |u> = (cos(theta/2), e^{i phi} sin(theta/2))."""
        x, y, z = self.bloch_vector()
        theta = math.acos(max(-1.0, min(1.0, z)))
        phi = math.atan2(y, x) % (2.0 * math.pi) if math.hypot(x, y) > 1e-15 else 0.0
        return theta, phi

    @classmethod
    def from_bloch(cls, theta: float, phi: float = 0.0) -> PolarizationVector:
        return cls(math.cos(theta / 2.0), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0))

    @classmethod
    def from_bloch_vector(cls, r) -> PolarizationVector:
        x, y, z = (float(c) for c in r)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm <= 1e-15:
            raise InvalidVectorError("Bloch vector must be nonzero")
        theta = math.acos(max(-1.0, min(1.0, z / norm)))
        phi = math.atan2(y, x) if math.hypot(x, y) > 1e-15 else 0.0
        return cls.from_bloch(theta, phi)

    @classmethod
    def from_great_circle(cls, angle: float) -> PolarizationVector:
        """Linear polarization whose Bloch vector is (sin angle, 0, cos angle)."""
        return cls(math.cos(angle / 2.0), math.sin(angle / 2.0))

    def to_dict(self) -> dict:
        return {"c0": _pair(self.c0), "c1": _pair(self.c1)}

    @classmethod
    def from_dict(cls, data: dict) -> PolarizationVector:
        """Accepts amplitudes {"c0", "c1"}, {"bloch": [theta, phi]} or {"greatCircle": angle}."""
        if "greatCircle" in data:
            return cls.from_great_circle(float(data["greatCircle"]))
        if "bloch" in data:
            angles = data["bloch"]
            if len(angles) != 2:
                raise InvalidVectorError(f"bloch must be [theta, phi], got {angles!r}")
            return cls.from_bloch(float(angles[0]), float(angles[1])).canonical()
        if "c0" not in data or "c1" not in data:
            raise InvalidVectorError("direction needs either 'bloch' or both 'c0' and 'c1'")
        return cls(_complex(data["c0"], "c0"), _complex(data["c1"], "c1"))

    def __str__(self) -> str:
        theta, phi = self.bloch_angles()
        return f"bloch({theta:.4f}, {phi:.4f})"


HORIZONTAL = PolarizationVector(1.0, 0.0)
VERTICAL = PolarizationVector(0.0, 1.0)
DIAGONAL = PolarizationVector(1.0, 1.0).normalized()
CIRCULAR = PolarizationVector(1.0, 1j).normalized()


@dataclass(frozen=True)
class PolarizerEffect:
    """Ideal polarizer effect for one outcome: a*I + (-1)^a |z><z|/<z|z>."""

    direction: PolarizationVector
    outcome: int
    matrix: CMatrix


@dataclass(frozen=True)
class ImperfectPolarizer:
    """Non-ideal polarizer with detection effect eps' I + (1 - eps) Pi_0.

    With ``symmetric=True`` the same affine form is used for both outcomes,
    which is only a complete measurement when eps = 2 eps'.
    """

    eps: float
    eps_prime: float
    direction: PolarizationVector
    symmetric: bool = False

    def __post_init__(self):
        if not (0.0 <= self.eps_prime <= self.eps < 1.0):
            raise ParameterRangeError(
                f"need 0 <= eps' <= eps < 1, got eps={self.eps}, eps'={self.eps_prime}"
            )
        if self.symmetric and abs(self.eps - 2.0 * self.eps_prime) > 1e-12:
            raise ParameterRangeError(
                f"symmetric effects need eps = 2 eps', got eps={self.eps}, eps'={self.eps_prime}"
            )

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.to_dict(),
            "eps": self.eps,
            "epsPrime": self.eps_prime,
            "symmetric": self.symmetric,
        }


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite 2x2 or 4x4 matrix.

    ``witness=True`` skips the positivity requirement so normalized
    entanglement witnesses can travel through the same code paths.
    """

    matrix: CMatrix
    witness: bool = False

    def __post_init__(self):
        m = self.matrix
        if not isinstance(m, CMatrix):
            m = CMatrix(np.asarray(m, dtype=complex))
            object.__setattr__(self, "matrix", m)
        gap = m.hermiticity_gap()
        if gap > 1e-12:
            raise ShapeError(f"density matrix is not Hermitian (gap {gap:.3g})")
        tr = m.trace().real
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidStateError(f"trace must be 1, got {tr:.12g}")
        if not self.witness:
            lowest = float(np.linalg.eigvalsh(m.symmetrized().data)[0])
            if lowest < -STATE_TOL:
                raise InvalidStateError(f"matrix is not positive semidefinite (min eigenvalue {lowest:.3g})")

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def data(self) -> np.ndarray:
        return self.matrix.data

    @classmethod
    def from_array(cls, data, witness: bool = False) -> DensityMatrix:
        return cls(CMatrix(np.asarray(data, dtype=complex)), witness=witness)

    @classmethod
    def pure(cls, direction: PolarizationVector) -> DensityMatrix:
        return cls(CMatrix(direction.projector_matrix()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(CMatrix(np.eye(dim, dtype=complex) / dim))

    def to_dict(self) -> dict:
        data = self.matrix.to_dict()
        if self.witness:
            data["witness"] = True
        return data

    @classmethod
    def from_dict(cls, data: dict, witness: Optional[bool] = None) -> DensityMatrix:
        flag = bool(data.get("witness", False)) if witness is None else witness
        return cls(CMatrix.from_dict(data), witness=flag)
