"""Post-selection ensembles and axiom-compliant models."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.models.errors import ParameterRangeError, ShapeError
from src.models.polarization import PolarizationVector
from src.models.subensemble import SubensembleModel

ENSEMBLE_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class PostSelectionEnsemble:
    """Polarization mixture of a photon after another photon was measured.

    The context is the measured direction ``x`` with outcome ``a`` inside the
    subensemble (u, v); ``mixture`` lists (weight, w) pairs.
    """

    x: PolarizationVector
    a: int
    u: PolarizationVector
    v: PolarizationVector
    mixture: tuple[tuple[float, PolarizationVector], ...]

    def __post_init__(self):
        parts = tuple((float(w), z) for w, z in self.mixture)
        if not parts:
            raise ParameterRangeError("a post-selection ensemble needs at least one polarization")
        weights = np.array([w for w, _ in parts])
        if np.any(weights < 0.0):
            raise ParameterRangeError(f"negative ensemble weight {weights.min():.3g}")
        if abs(weights.sum() - 1.0) > ENSEMBLE_WEIGHT_TOL:
            raise ParameterRangeError(f"ensemble weights sum to {weights.sum():.15g}, not 1")
        object.__setattr__(self, "mixture", parts)

    def to_dict(self) -> dict:
        return {"mixture": [{"weight": w, "w": z.to_dict()} for w, z in self.mixture]}

    @staticmethod
    def parse_mixture(data: dict) -> tuple[tuple[float, PolarizationVector], ...]:
        return tuple((float(e["weight"]), PolarizationVector.from_dict(e["w"])) for e in data["mixture"])


EnsembleKey = tuple[int, int, int]  # (pair, x, a)


@dataclass(frozen=True, eq=False)
class AxiomModel:
    """A subensemble model plus Bob's post-selected photon for every (pair, x, a)."""

    model: SubensembleModel
    ensembles: dict[EnsembleKey, PostSelectionEnsemble] = field(default_factory=dict)

    def __post_init__(self):
        n_alice = self.model.settings.n_alice
        for k in range(len(self.model)):
            for x in range(n_alice):
                for a in (0, 1):
                    if (k, x, a) not in self.ensembles:
                        raise ShapeError(f"missing post-selection ensemble for pair {k}, x={x}, a={a}")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "ensembles": [
                {"pair": k, "x": x, "a": a, **e.to_dict()}
                for (k, x, a), e in sorted(self.ensembles.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> AxiomModel:
        model = SubensembleModel.from_dict(data["model"])
        ensembles = {}
        for entry in data["ensembles"]:
            k, x, a = int(entry["pair"]), int(entry["x"]), int(entry["a"])
            ensembles[(k, x, a)] = PostSelectionEnsemble(
                x=model.settings.alice[x], a=a, u=model.u(k), v=model.v(k),
                mixture=PostSelectionEnsemble.parse_mixture(entry),
            )
        return cls(model=model, ensembles=ensembles)


# (party receiving the photon, settings of the earlier parties, their outcomes)
LevelKey = tuple[int, tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class MultipartySubensemble:
    """One subensemble of an N-party model.

    ``table`` is P(a_1..a_N | x_1..x_N) indexed [x_1, ..., x_N, a_1, ..., a_N].
    ``ensembles[(j, xs, as)]`` is party j's post-selected photon after parties
    0..j-1 measured settings ``xs`` with outcomes ``as``.
    """

    weight: float
    polarizations: tuple[PolarizationVector, ...]
    table: np.ndarray
    ensembles: dict[LevelKey, tuple[tuple[float, PolarizationVector], ...]]

    def __post_init__(self):
        arr = np.array(self.table, dtype=float)
        n = len(self.polarizations)
        if arr.ndim != 2 * n or arr.shape[n:] != (2,) * n:
            raise ShapeError(f"table for {n} parties must have {2 * n} axes ending in 2s, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

    @property
    def parties(self) -> int:
        return len(self.polarizations)


@dataclass(frozen=True, eq=False)
class MultipartyModel:
    """Axiom model for N photons; parties measure in index order."""

    settings: tuple[tuple[PolarizationVector, ...], ...]
    subensembles: tuple[MultipartySubensemble, ...]

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(tuple(s) for s in self.settings))
        object.__setattr__(self, "subensembles", tuple(self.subensembles))
        n = len(self.settings)
        if n < 2:
            raise ShapeError("a multiparty model needs at least two parties")
        shape = tuple(len(s) for s in self.settings)
        for sub in self.subensembles:
            if sub.parties != n or sub.table.shape[:n] != shape:
                raise ShapeError(f"subensemble table {sub.table.shape} does not match settings {shape}")
        weights = np.array([sub.weight for sub in self.subensembles])
        if weights.size == 0 or np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-10:
            raise ParameterRangeError("subensemble weights must be non-negative and sum to 1")

    @property
    def parties(self) -> int:
        return len(self.settings)

    def average(self) -> np.ndarray:
        return sum(sub.weight * sub.table for sub in self.subensembles)
