"""Quantum behaviors, no-signalling checks and Bell functionals."""
from __future__ import annotations

import logging

import numpy as np

from src.engine.polarization import effect_pair
from src.models.behavior import Behavior, BellFunctional, NoSignallingReport, SettingsSet
from src.models.errors import InvalidStateError, ShapeError
from src.models.polarization import DensityMatrix

logger = logging.getLogger(__name__)


def party_effects(settings: SettingsSet, side: str) -> np.ndarray:
    """Effects of one party, shape (n, 2, 2, 2) indexed [setting, outcome]."""
    dirs = settings.alice if side == "A" else settings.bob
    noise = settings.alice_noise if side == "A" else settings.bob_noise
    out = np.empty((len(dirs), 2, 2, 2), dtype=complex)
    for i, (d, n) in enumerate(zip(dirs, noise)):
        e0, e1 = effect_pair(d, n)
        out[i, 0], out[i, 1] = e0.data, e1.data
    return out


def quantum_behavior(rho: DensityMatrix, s: SettingsSet) -> Behavior:
    """p(a,b|x,y) = tr((Pi^x_a (x) Pi^y_b) rho)."""
    if rho.dim != 4:
        raise ShapeError(f"quantum_behavior needs a two-qubit state, got dimension {rho.dim}")
    if rho.witness:
        raise InvalidStateError("quantum_behavior needs a state, not a witness")
    ea = party_effects(s, "A")
    eb = party_effects(s, "B")
    r = rho.data.reshape(2, 2, 2, 2)  # (i, k, j, l)
    # tr((A (x) B) rho) = sum A[j,i] B[l,k] rho[i,k,j,l]
    table = np.einsum("xaji,yblk,ikjl->xyab", ea, eb, r).real
    return Behavior(table)


def check_no_signalling(b: Behavior, tol: float = 1e-10) -> NoSignallingReport:
    """Compare each party's marginals across the other party's settings."""
    worst = 0.0
    where: dict = {}

    alice = b.alice_marginals()  # [x, y, a]
    spread_a = alice.max(axis=1) - alice.min(axis=1)  # [x, a]
    if spread_a.size and spread_a.max() > worst:
        x, a = np.unravel_index(int(np.argmax(spread_a)), spread_a.shape)
        worst = float(spread_a[x, a])
        where = {
            "party": "A", "x": int(x), "a": int(a),
            "y": int(np.argmax(alice[x, :, a])), "yPrime": int(np.argmin(alice[x, :, a])),
        }

    bob = b.bob_marginals()  # [x, y, b]
    spread_b = bob.max(axis=0) - bob.min(axis=0)  # [y, b]
    if spread_b.size and spread_b.max() > worst:
        y, bb = np.unravel_index(int(np.argmax(spread_b)), spread_b.shape)
        worst = float(spread_b[y, bb])
        where = {
            "party": "B", "y": int(y), "b": int(bb),
            "x": int(np.argmax(bob[:, y, bb])), "xPrime": int(np.argmin(bob[:, y, bb])),
        }

    ok = worst <= tol
    if not ok:
        logger.debug("Signalling detected: %.3g at %s", worst, where)
    return NoSignallingReport(ok=ok, max_violation=worst, worst_indices=where)


def bell_value(b: Behavior, f: BellFunctional) -> float:
    """sum c[x,y,a,b] p(a,b|x,y)."""
    if f.coefficients.shape != b.table.shape:
        raise ShapeError(f"functional shape {f.coefficients.shape} does not match behavior {b.table.shape}")
    return float(np.sum(f.coefficients * b.table))
