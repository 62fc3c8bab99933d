"""Exact-shape complex matrix kernel for one- and two-qubit operators."""
from __future__ import annotations

from enum import Enum
from typing import Union

import numpy as np

from src.models.errors import ShapeError
from src.models.matrix import HERMITIAN_TOL, CMatrix
from src.models.polarization import DensityMatrix

MatrixLike = Union[CMatrix, DensityMatrix]


class Side(Enum):
    """Subsystem of a two-qubit operator."""
    A = "A"
    B = "B"


def _as_cmatrix(m: MatrixLike) -> CMatrix:
    return m.matrix if isinstance(m, DensityMatrix) else m


def _require_dim(m: CMatrix, dim: int, what: str) -> None:
    if m.dim != dim:
        raise ShapeError(f"{what} expects a {dim}x{dim} matrix, got {m.dim}x{m.dim}")


def hermitian_eigensystem(m: MatrixLike) -> list[tuple[float, np.ndarray]]:
    """Eigenvalues (ascending) with orthonormal eigenvectors of a Hermitian matrix.

    Inputs within the Hermitian tolerance are symmetrized before solving.
    """
    mat = _as_cmatrix(m)
    gap = mat.hermiticity_gap()
    if gap > HERMITIAN_TOL:
        raise ShapeError(f"matrix is not Hermitian (gap {gap:.3g})")
    values, vectors = np.linalg.eigh(mat.symmetrized().data)
    return [(float(values[i]), vectors[:, i].copy()) for i in range(len(values))]


def eigenvalues(m: MatrixLike) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    return np.array([value for value, _ in hermitian_eigensystem(m)])


def tensor_product(a: MatrixLike, b: MatrixLike) -> CMatrix:
    """Kronecker product; entry (2i+k, 2j+l) is a[i][j] * b[k][l]."""
    ma, mb = _as_cmatrix(a), _as_cmatrix(b)
    _require_dim(ma, 2, "tensor_product")
    _require_dim(mb, 2, "tensor_product")
    return CMatrix(np.kron(ma.data, mb.data))


def partial_trace(m: MatrixLike, keep: Side) -> CMatrix:
    """Trace out the subsystem that is not kept."""
    mat = _as_cmatrix(m)
    _require_dim(mat, 4, "partial_trace")
    blocks = mat.data.reshape(2, 2, 2, 2)  # (i, k, j, l) for row 2i+k, column 2j+l
    if keep is Side.A:
        return CMatrix(np.einsum("ikjk->ij", blocks))
    return CMatrix(np.einsum("ikil->kl", blocks))


def partial_transpose(m: MatrixLike) -> CMatrix:
    """Transpose on subsystem B."""
    mat = _as_cmatrix(m)
    _require_dim(mat, 4, "partial_transpose")
    return CMatrix(mat.data.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4))


def trace_distance(a: MatrixLike, b: MatrixLike) -> float:
    """Half the sum of absolute eigenvalues of a - b, clipped to [0, 1]."""
    ma, mb = _as_cmatrix(a), _as_cmatrix(b)
    if ma.dim != mb.dim:
        raise ShapeError(f"dimension mismatch: {ma.dim} vs {mb.dim}")
    diff = (ma - mb).symmetrized()
    value = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff.data))))
    return min(1.0, max(0.0, value))
