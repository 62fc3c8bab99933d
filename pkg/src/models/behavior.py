"""Measurement settings, correlation tables and Bell functionals."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.models.errors import InvalidBehaviorError, ParameterRangeError, ShapeError
from src.models.polarization import PolarizationVector

NEGATIVE_CLAMP = 1e-12
NORMALIZATION_TOL = 1e-10

Noise = Optional[tuple[float, float]]


@dataclass(frozen=True)
class SettingsSet:
    """Polarizer directions for Alice (x's) and Bob (y's).

    ``alice_noise`` / ``bob_noise`` optionally give (eps, eps') per direction;
    None means an ideal polarizer.
    """

    alice: tuple[PolarizationVector, ...]
    bob: tuple[PolarizationVector, ...]
    alice_noise: tuple[Noise, ...] = ()
    bob_noise: tuple[Noise, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alice", tuple(self.alice))
        object.__setattr__(self, "bob", tuple(self.bob))
        if not self.alice or not self.bob:
            raise ShapeError("both parties need at least one direction")
        for name, dirs, noise in (("alice", self.alice, self.alice_noise), ("bob", self.bob, self.bob_noise)):
            padded = tuple(noise) if noise else (None,) * len(dirs)
            if len(padded) != len(dirs):
                raise ShapeError(f"{name}_noise has {len(padded)} entries for {len(dirs)} directions")
            for entry in padded:
                if entry is not None and not (0.0 <= entry[1] <= entry[0] < 1.0):
                    raise ParameterRangeError(f"need 0 <= eps' <= eps < 1, got {entry!r}")
            object.__setattr__(self, f"{name}_noise", padded)

    @property
    def n_alice(self) -> int:
        return len(self.alice)

    @property
    def n_bob(self) -> int:
        return len(self.bob)

    @property
    def is_ideal(self) -> bool:
        return all(n is None for n in self.alice_noise + self.bob_noise)

    @classmethod
    def from_great_circle(cls, alice_angles, bob_angles) -> SettingsSet:
        """Linear polarizers given by angles on the X-Z great circle of the sphere."""
        return cls(
            alice=tuple(PolarizationVector.from_great_circle(t) for t in alice_angles),
            bob=tuple(PolarizationVector.from_great_circle(t) for t in bob_angles),
        )

    def to_dict(self) -> dict:
        def side(dirs, noise):
            out = []
            for d, n in zip(dirs, noise):
                entry = d.to_dict()
                if n is not None:
                    entry["eps"], entry["epsPrime"] = n
                out.append(entry)
            return out

        return {"alice": side(self.alice, self.alice_noise), "bob": side(self.bob, self.bob_noise)}

    @classmethod
    def from_dict(cls, data: dict) -> SettingsSet:
        def side(entries):
            dirs, noise = [], []
            for entry in entries:
                dirs.append(PolarizationVector.from_dict(entry))
                if "eps" in entry:
                    noise.append((float(entry["eps"]), float(entry.get("epsPrime", 0.0))))
                else:
                    noise.append(None)
            return tuple(dirs), tuple(noise)

        alice, alice_noise = side(data["alice"])
        bob, bob_noise = side(data["bob"])
        return cls(alice=alice, bob=bob, alice_noise=alice_noise, bob_noise=bob_noise)


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional probabilities p(a,b|x,y), stored as an array indexed [x, y, a, b]."""

    table: np.ndarray

    def __post_init__(self):
        arr = np.array(self.table, dtype=float)
        if arr.ndim != 4 or arr.shape[2:] != (2, 2) or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"behavior table must have shape (nA, nB, 2, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidBehaviorError("behavior has non-finite entries")
        lowest = float(arr.min())
        if lowest < -NEGATIVE_CLAMP:
            raise InvalidBehaviorError(f"negative probability {lowest:.3g}")
        sums = arr.sum(axis=(2, 3))
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > NORMALIZATION_TOL:
            raise InvalidBehaviorError(f"probabilities do not sum to 1 (off by {worst:.3g})")
        if lowest < 0.0 or worst > 0.0:
            arr = np.clip(arr, 0.0, None)
            arr = arr / arr.sum(axis=(2, 3), keepdims=True)
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

    @property
    def n_alice(self) -> int:
        return self.table.shape[0]

    @property
    def n_bob(self) -> int:
        return self.table.shape[1]

    def p(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.table[x, y, a, b])

    def alice_marginals(self) -> np.ndarray:
        """Shape (nA, nB, 2): sum over b."""
        return self.table.sum(axis=3)

    def bob_marginals(self) -> np.ndarray:
        """Shape (nA, nB, 2): sum over a."""
        return self.table.sum(axis=2)

    def correlators(self) -> np.ndarray:
        """E(x,y) = sum_ab (-1)^(a+b) p(a,b|x,y)."""
        t = self.table
        return t[:, :, 0, 0] - t[:, :, 0, 1] - t[:, :, 1, 0] + t[:, :, 1, 1]

    @classmethod
    def mixture(cls, parts: list[tuple[float, Behavior]]) -> Behavior:
        return cls(sum(w * b.table for w, b in parts))

    def max_abs_diff(self, other: Behavior) -> float:
        if self.table.shape != other.table.shape:
            raise ShapeError(f"behavior shapes differ: {self.table.shape} vs {other.table.shape}")
        return float(np.max(np.abs(self.table - other.table)))

    def to_dict(self) -> dict:
        return {"nA": self.n_alice, "nB": self.n_bob, "p": self.table.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> Behavior:
        table = np.array(data["p"], dtype=float)
        if "nA" in data and "nB" in data and table.shape[:2] != (int(data["nA"]), int(data["nB"])):
            raise ShapeError(f"p has shape {table.shape}, declared nA={data['nA']} nB={data['nB']}")
        return cls(table)


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Linear functional sum c[x,y,a,b] p(a,b|x,y)."""

    coefficients: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=float)
        if arr.ndim != 4 or arr.shape[2:] != (2, 2):
            raise ShapeError(f"functional must have shape (nA, nB, 2, 2), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.coefficients.shape[0], self.coefficients.shape[1]

    @classmethod
    def chsh(cls) -> BellFunctional:
        """E(0,0) + E(0,1) + E(1,0) - E(1,1)."""
        signs = np.array([[1.0, 1.0], [1.0, -1.0]])
        parity = np.array([[1.0, -1.0], [-1.0, 1.0]])
        return cls(np.einsum("xy,ab->xyab", signs, parity), name="chsh")

    def to_dict(self) -> dict:
        if self.name == "chsh":
            return {"builtin": "chsh"}
        nA, nB = self.shape
        return {"name": self.name, "nA": nA, "nB": nB, "c": self.coefficients.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> BellFunctional:
        builtin = data.get("builtin")
        if builtin is not None:
            if builtin != "chsh":
                raise ShapeError(f"unknown builtin functional {builtin!r}")
            return cls.chsh()
        return cls(np.array(data["c"], dtype=float), name=data.get("name", "custom"))


@dataclass
class NoSignallingReport:
    """Largest dependence of a party's marginal on the other party's setting."""

    ok: bool
    max_violation: float
    worst_indices: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "maxViolation": self.max_violation, "worstIndices": self.worst_indices}
