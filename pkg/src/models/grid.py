"""Discretizations of the Poincare sphere."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from src.models.errors import InvalidVectorError, ShapeError
from src.models.polarization import PolarizationVector

DUPLICATE_TOL = 1e-12


def bloch_points(angles: np.ndarray) -> np.ndarray:
    """Unit Bloch vectors for rows of (theta, phi)."""
    theta, phi = angles[:, 0], angles[:, 1]
    return np.column_stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


@dataclass(frozen=True, eq=False)
class PolarizationGrid:
    """Grid points stored as Bloch angles (theta, phi), one row per point.

    The point with index i is the vector (cos(theta/2), e^{i phi} sin(theta/2)),
    so a grid written to disk and read back yields identical vectors.
    ``covering_angle`` is the largest Bloch angle from any point of the sphere
    to its nearest grid point; ``probe_count`` records how many random
    probes cross-checked it.
    """

    angles: np.ndarray
    covering_angle: float
    probe_count: int = 0

    def __post_init__(self):
        arr = np.array(self.angles, dtype=float).reshape(-1, 2) if len(self.angles) else np.zeros((0, 2))
        if arr.shape[0] < 1:
            raise ShapeError("a grid needs at least one point")
        if not np.all(np.isfinite(arr)):
            raise InvalidVectorError("grid angles must be finite")
        pairs = cKDTree(bloch_points(arr)).query_pairs(DUPLICATE_TOL)
        if pairs:
            i, j = sorted(pairs)[0]
            raise InvalidVectorError(f"grid points {i} and {j} coincide")
        if not 0.0 <= self.covering_angle <= np.pi + 1e-12:
            raise ShapeError(f"covering angle must lie in [0, pi], got {self.covering_angle}")
        arr.setflags(write=False)
        object.__setattr__(self, "angles", arr)

    def __len__(self) -> int:
        return self.angles.shape[0]

    @cached_property
    def points(self) -> tuple[PolarizationVector, ...]:
        return tuple(PolarizationVector.from_bloch(t, p) for t, p in self.angles)

    @cached_property
    def kets(self) -> np.ndarray:
        """Unit kets, shape (n, 2)."""
        theta, phi = self.angles[:, 0], self.angles[:, 1]
        return np.column_stack([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])

    @cached_property
    def bloch(self) -> np.ndarray:
        return bloch_points(self.angles)

    def index_of(self, z: PolarizationVector) -> int:
        """Index of the grid point equal to ``z`` up to phase, or -1."""
        dist, idx = cKDTree(self.bloch).query(z.bloch_vector())
        return int(idx) if dist <= 1e-9 else -1

    def extended(self, points: list[PolarizationVector]) -> PolarizationGrid:
        """A grid with ``points`` inserted and the covering angle recomputed."""
        from src.engine.grid import extend_grid

        return extend_grid(self, points)

    def to_dict(self) -> dict:
        return {
            "points": [[float(t), float(p)] for t, p in self.angles],
            "coveringAngle": self.covering_angle,
            "probeCount": self.probe_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PolarizationGrid:
        angles = np.array(data["points"], dtype=float)
        if angles.ndim != 2 or angles.shape[1] != 2:
            raise ShapeError("grid points must be [theta, phi] pairs")
        return cls(
            angles=angles,
            covering_angle=float(data["coveringAngle"]),
            probe_count=int(data.get("probeCount", 0)),
        )
