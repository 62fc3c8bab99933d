"""Subensemble (crypto-nonlocal) models over polarization grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.models.behavior import Behavior, SettingsSet
from src.models.errors import ShapeError
from src.models.grid import PolarizationGrid
from src.models.polarization import PolarizationVector


@dataclass(frozen=True, eq=False)
class SubensembleModel:
    """Weights P(u,v) over grid pairs and a conditional table per pair.

    ``pairs[k]`` holds the (u, v) grid ids of subensemble k, ``weights[k]``
    its probability and ``conditionals[k]`` the table P(a,b|x,y,u,v) indexed
    [x, y, a, b]. ``slack`` is the Malus tolerance the model was built with.
    """

    settings: SettingsSet
    grid_u: PolarizationGrid
    grid_v: PolarizationGrid
    pairs: np.ndarray
    weights: np.ndarray
    conditionals: np.ndarray
    slack: float = 0.0

    def __post_init__(self):
        pairs = np.array(self.pairs, dtype=int).reshape(-1, 2)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        cond = np.array(self.conditionals, dtype=float)
        k = pairs.shape[0]
        shape = (k, self.settings.n_alice, self.settings.n_bob, 2, 2)
        if weights.shape != (k,) or cond.shape != shape:
            raise ShapeError(f"model needs {k} weights and conditionals of shape {shape}, got "
                             f"{weights.shape} and {cond.shape}")
        if k and (pairs[:, 0].max() >= len(self.grid_u) or pairs[:, 1].max() >= len(self.grid_v)
                  or pairs.min() < 0):
            raise ShapeError("pair ids outside the grids")
        for arr in (pairs, weights, cond):
            arr.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "conditionals", cond)

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def u(self, k: int) -> PolarizationVector:
        return self.grid_u.points[int(self.pairs[k, 0])]

    def v(self, k: int) -> PolarizationVector:
        return self.grid_v.points[int(self.pairs[k, 1])]

    def average(self) -> Behavior:
        """sum_uv P(u,v) P(a,b|x,y,u,v)."""
        return Behavior(np.einsum("k,kxyab->xyab", self.weights, self.conditionals))

    def alice_marginals(self) -> np.ndarray:
        """Shape (K, nA, nB, 2)."""
        return self.conditionals.sum(axis=4)

    def bob_marginals(self) -> np.ndarray:
        """Shape (K, nA, nB, 2)."""
        return self.conditionals.sum(axis=3)

    def to_dict(self) -> dict:
        return {
            "settings": self.settings.to_dict(),
            "gridU": self.grid_u.to_dict(),
            "gridV": self.grid_v.to_dict(),
            "slack": self.slack,
            "subensembles": [
                {"u": int(u), "v": int(v), "weight": float(w), "p": c.tolist()}
                for (u, v), w, c in zip(self.pairs, self.weights, self.conditionals)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> SubensembleModel:
        settings = SettingsSet.from_dict(data["settings"])
        entries = data["subensembles"]
        shape = (0, settings.n_alice, settings.n_bob, 2, 2)
        return cls(
            settings=settings,
            grid_u=PolarizationGrid.from_dict(data["gridU"]),
            grid_v=PolarizationGrid.from_dict(data["gridV"]),
            pairs=np.array([[e["u"], e["v"]] for e in entries], dtype=int).reshape(-1, 2),
            weights=np.array([e["weight"] for e in entries], dtype=float),
            conditionals=np.array([e["p"] for e in entries], dtype=float) if entries else np.zeros(shape),
            slack=float(data.get("slack", 0.0)),
        )
