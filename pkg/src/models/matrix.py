"""Complex matrix value type for 2x2 and 4x4 operators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.models.errors import ShapeError

ALLOWED_DIMS = (2, 4)
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CMatrix:
    """Immutable complex square matrix of dimension 2 or 4.

    The entries live in a read-only numpy array; arithmetic returns new
    instances, so values can be shared freely.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in ALLOWED_DIMS:
            raise ShapeError(f"expected a 2x2 or 4x4 matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("matrix has non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def identity(cls, dim: int) -> CMatrix:
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def diag(cls, *values: complex) -> CMatrix:
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @property
    def dagger(self) -> CMatrix:
        return CMatrix(self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_gap(self) -> float:
        """max |A[i][j] - conj(A[j][i])|."""
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_gap() <= tol

    def symmetrized(self) -> CMatrix:
        """(A + A^dagger) / 2."""
        return CMatrix((self.data + self.data.conj().T) / 2.0)

    def max_abs_diff(self, other: CMatrix) -> float:
        if self.dim != other.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return float(np.max(np.abs(self.data - other.data)))

    def __add__(self, other: CMatrix) -> CMatrix:
        if self.dim != other.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return CMatrix(self.data + other.data)

    def __sub__(self, other: CMatrix) -> CMatrix:
        if self.dim != other.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return CMatrix(self.data - other.data)

    def __matmul__(self, other: CMatrix) -> CMatrix:
        if self.dim != other.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return CMatrix(self.data @ other.data)

    def __mul__(self, scalar: complex) -> CMatrix:
        return CMatrix(self.data * scalar)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CMatrix):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash(self.data.tobytes())

    def to_dict(self) -> dict:
        """Row-major list of [re, im] pairs."""
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in self.data.ravel()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> CMatrix:
        """Reads the row-major pair list, or the same pairs nested by row."""
        dim = int(data["dim"])
        entries = data["entries"]
        if len(entries) == dim and all(isinstance(row, list) and row and isinstance(row[0], list) for row in entries):
            entries = [pair for row in entries for pair in row]
        if len(entries) != dim * dim:
            raise ShapeError(f"expected {dim * dim} entries, got {len(entries)}")
        values = [complex(float(re), float(im)) for re, im in entries]
        return cls(np.array(values, dtype=complex).reshape(dim, dim))
