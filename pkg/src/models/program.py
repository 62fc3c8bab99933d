"""Linear programs and their certificates."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.models.errors import ShapeError


class LPStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    UNDECIDED = "undecided"


def _sparse(rows, n_vars: int, name: str) -> sp.csr_array:
    if rows is None:
        return sp.csr_array((0, n_vars))
    if sp.issparse(rows):
        mat = sp.csr_array(rows, dtype=float)
    elif isinstance(rows, np.ndarray):
        mat = sp.csr_array(np.atleast_2d(rows).astype(float)) if rows.size else sp.csr_array((0, n_vars))
    else:
        # row lists of (index, value)
        data, indices, indptr = [], [], [0]
        for row in rows:
            for j, v in row:
                indices.append(int(j))
                data.append(float(v))
            indptr.append(len(indices))
        mat = sp.csr_array((data, indices, indptr), shape=(len(indptr) - 1, n_vars))
    if mat.shape[1] != n_vars:
        raise ShapeError(f"{name} has {mat.shape[1]} columns, expected {n_vars}")
    return mat


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """max c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= lower.

    Constraint matrices are stored sparse. Without an objective the program
    is a pure feasibility question.
    """

    n_vars: int
    a_eq: sp.csr_array
    b_eq: np.ndarray
    a_ub: sp.csr_array
    b_ub: np.ndarray
    lower: np.ndarray
    objective: Optional[np.ndarray] = None

    @classmethod
    def build(
        cls,
        n_vars: int,
        eq_rows=None,
        b_eq=None,
        ub_rows=None,
        b_ub=None,
        lower=None,
        objective=None,
    ) -> LinearProgram:
        """Build from dense arrays, sparse matrices or row lists of (index, value)."""
        if n_vars < 0:
            raise ShapeError("n_vars must be non-negative")
        a_eq = _sparse(eq_rows, n_vars, "A_eq")
        a_ub = _sparse(ub_rows, n_vars, "A_ub")
        beq = np.asarray(b_eq if b_eq is not None else [], dtype=float).reshape(-1)
        bub = np.asarray(b_ub if b_ub is not None else [], dtype=float).reshape(-1)
        if a_eq.shape[0] != beq.size:
            raise ShapeError(f"A_eq has {a_eq.shape[0]} rows but b_eq has {beq.size} entries")
        if a_ub.shape[0] != bub.size:
            raise ShapeError(f"A_ub has {a_ub.shape[0]} rows but b_ub has {bub.size} entries")
        lb = np.zeros(n_vars) if lower is None else np.broadcast_to(np.asarray(lower, dtype=float), (n_vars,)).copy()
        c = None
        if objective is not None:
            c = np.asarray(objective, dtype=float).reshape(-1)
            if c.size != n_vars:
                raise ShapeError(f"objective has {c.size} entries, expected {n_vars}")
        for name, arr in (("b_eq", beq), ("b_ub", bub), ("lower", lb),
                          ("A_eq", a_eq.data), ("A_ub", a_ub.data)):
            if not np.all(np.isfinite(arr)):
                raise ShapeError(f"{name} has non-finite entries")
        if c is not None and not np.all(np.isfinite(c)):
            raise ShapeError("objective has non-finite entries")
        return cls(n_vars=n_vars, a_eq=a_eq, b_eq=beq, a_ub=a_ub, b_ub=bub, lower=lb, objective=c)

    @property
    def n_eq(self) -> int:
        return self.a_eq.shape[0]

    @property
    def n_ub(self) -> int:
        return self.a_ub.shape[0]


@dataclass
class FeasibilityCertificate:
    """Evidence for an LP verdict.

    ``feasible``: a primal point (plus, for optima, dual multipliers and, for
    unbounded programs, an improving direction). ``infeasible``: a Farkas ray
    (y on the equalities, z >= 0 on the inequalities) with
    A^T y + G^T z >= 0 and b.y + h.z < (A^T y + G^T z).lower.
    """

    kind: str
    primal: Optional[np.ndarray] = None
    ray_eq: Optional[np.ndarray] = None
    ray_ub: Optional[np.ndarray] = None
    dual_eq: Optional[np.ndarray] = None
    dual_ub: Optional[np.ndarray] = None
    direction: Optional[np.ndarray] = None
    residual: float = 0.0

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "residual": self.residual}
        for key, value in (
            ("primal", self.primal), ("rayEq", self.ray_eq), ("rayUb", self.ray_ub),
            ("dualEq", self.dual_eq), ("dualUb", self.dual_ub), ("direction", self.direction),
        ):
            if value is not None:
                out[key] = [float(v) for v in value]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> FeasibilityCertificate:
        def arr(key):
            return np.asarray(data[key], dtype=float) if key in data else None

        return cls(
            kind=data["kind"],
            primal=arr("primal"),
            ray_eq=arr("rayEq"),
            ray_ub=arr("rayUb"),
            dual_eq=arr("dualEq"),
            dual_ub=arr("dualUb"),
            direction=arr("direction"),
            residual=float(data.get("residual", 0.0)),
        )


@dataclass
class LPResult:
    status: LPStatus
    certificate: Optional[FeasibilityCertificate] = None
    objective: Optional[float] = None
    message: str = ""
    iterations: int = 0


@dataclass
class CertificateCheck:
    ok: bool
    margin: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "margin": self.margin, "details": self.details}
