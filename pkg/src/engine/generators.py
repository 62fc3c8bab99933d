"""Seeded generators of subensemble and axiom-compliant models."""
from __future__ import annotations

import itertools
import logging
from typing import Optional

import numpy as np

from src.engine.behavior import party_effects
from src.engine.crypto_nonlocal import local_response
from src.engine.states import random_direction
from src.models.axiom import AxiomModel, MultipartyModel, MultipartySubensemble, PostSelectionEnsemble
from src.models.behavior import SettingsSet
from src.models.errors import ParameterRangeError
from src.models.grid import PolarizationGrid
from src.models.polarization import DensityMatrix, PolarizationVector
from src.models.subensemble import SubensembleModel

logger = logging.getLogger(__name__)

RANGE_TOL = 1e-12


def _random_pairs(rng: np.random.Generator, gu: PolarizationGrid, gv: PolarizationGrid, n_pairs: int) -> np.ndarray:
    total = len(gu) * len(gv)
    if not 1 <= n_pairs <= total:
        raise ParameterRangeError(f"need 1 <= n_pairs <= {total}, got {n_pairs}")
    flat = rng.choice(total, size=n_pairs, replace=False)
    return np.column_stack(np.unravel_index(np.sort(flat), (len(gu), len(gv))))


def random_subensemble_model(
    rng: np.random.Generator,
    s: SettingsSet,
    gu: PolarizationGrid,
    gv: PolarizationGrid,
    n_pairs: int = 4,
) -> SubensembleModel:
    """Exact-Malus model whose subensembles carry random (generally correlated) tables."""
    pairs = _random_pairs(rng, gu, gv, n_pairs)
    ma = local_response(gu, s, "A")[pairs[:, 0]][:, :, None]
    mb = local_response(gv, s, "B")[pairs[:, 1]][:, None, :]
    lo = np.maximum(0.0, ma + mb - 1.0)
    hi = np.minimum(ma, mb)
    q = lo + rng.uniform(size=(n_pairs, s.n_alice, s.n_bob)) * (hi - lo)
    cond = np.empty(q.shape + (2, 2))
    cond[..., 0, 0] = q
    cond[..., 0, 1] = ma - q
    cond[..., 1, 0] = mb - q
    cond[..., 1, 1] = 1.0 - ma - mb + q
    return SubensembleModel(
        settings=s, grid_u=gu, grid_v=gv, pairs=pairs,
        weights=rng.dirichlet(np.ones(n_pairs)), conditionals=np.clip(cond, 0.0, None),
    )


def _max_weight(residual: np.ndarray, w: np.ndarray) -> float:
    """Largest t with residual - t |w><w| still positive semidefinite (w a unit ket)."""
    values, vectors = np.linalg.eigh(residual)
    support = values > RANGE_TOL
    if not support.any():
        return 0.0
    coords = vectors.conj().T @ w
    if np.linalg.norm(coords[~support]) > 1e-9:
        return 0.0
    return 1.0 / float(np.sum(np.abs(coords[support]) ** 2 / values[support]))


def rejection_decomposition(
    rng: np.random.Generator,
    target: DensityMatrix,
    parts: int = 4,
    max_proposals: int = 200,
) -> tuple[tuple[float, PolarizationVector], ...]:
    """Random fine-grained decomposition of a one-photon state into polarizations.

    Proposals are random directions or rescaled, rephased copies of the
    target's eigenvectors; a proposal is accepted with a random share of the
    largest weight that keeps the remainder a state. For a pure target only
    copies of the target itself are ever accepted.
    """
    if target.dim != 2:
        raise ParameterRangeError("rejection_decomposition works on one-photon states")
    residual = (target.data + target.data.conj().T) / 2.0
    eig_vectors = np.linalg.eigh(residual)[1]
    accepted: list[tuple[float, PolarizationVector]] = []
    for _ in range(max_proposals):
        if len(accepted) >= parts - 1:
            break
        if rng.uniform() < 0.5:
            z = random_direction(rng)
        else:
            base = eig_vectors[:, int(rng.integers(2))]
            scale = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
            z = PolarizationVector(scale * base[0], scale * base[1])
        ket = z.ket / np.sqrt(z.norm_sq)
        t = _max_weight(residual, ket) * rng.uniform(0.2, 0.8)
        if t <= RANGE_TOL:
            continue
        residual = residual - t * np.outer(ket, ket.conj())
        accepted.append((t, z))
    values, vectors = np.linalg.eigh((residual + residual.conj().T) / 2.0)
    for i, value in enumerate(values):
        if value > RANGE_TOL:
            accepted.append((float(value), PolarizationVector(vectors[0, i], vectors[1, i])))
    total = sum(w for w, _ in accepted)
    return tuple((w / total, z) for w, z in accepted)


def random_axiom_model(
    rng: np.random.Generator,
    s: SettingsSet,
    gu: PolarizationGrid,
    gv: PolarizationGrid,
    n_pairs: int = 4,
    parts: int = 4,
) -> AxiomModel:
    """Axiom-compliant model with randomized post-selection ensembles.

    Alice's outcomes follow Malus' law for u. Bob's post-selected photons are
    random decompositions of |v><v|; since |v><v| is pure the sampler returns
    only copies of v, so Bob's conditionals come out as products. That
    collapse is what enforce_axioms later confirms.
    """
    pairs = _random_pairs(rng, gu, gv, n_pairs)
    ma = local_response(gu, s, "A")[pairs[:, 0]]
    eb = party_effects(s, "B")
    ensembles = {}
    cond = np.empty((n_pairs, s.n_alice, s.n_bob, 2, 2))
    for k, (iu, iv) in enumerate(pairs):
        u, v = gu.points[iu], gv.points[iv]
        target = DensityMatrix.pure(v)
        for x in range(s.n_alice):
            for a in (0, 1):
                mixture = rejection_decomposition(rng, target, parts)
                ensembles[(k, x, a)] = PostSelectionEnsemble(x=s.alice[x], a=a, u=u, v=v, mixture=mixture)
                rho = sum(w * z.projector_matrix() for w, z in mixture)
                pa = ma[k, x] if a == 0 else 1.0 - ma[k, x]
                cond[k, x, :, a, :] = pa * np.einsum("ij,ybji->yb", rho, eb).real
    model = SubensembleModel(
        settings=s, grid_u=gu, grid_v=gv, pairs=pairs,
        weights=rng.dirichlet(np.ones(n_pairs)), conditionals=cond,
    )
    logger.debug("Generated axiom model with %d pairs", n_pairs)
    return AxiomModel(model=model, ensembles=ensembles)


def random_multiparty_model(
    rng: np.random.Generator,
    settings: list[list[PolarizationVector]],
    n_subensembles: int = 3,
    parts: int = 3,
    polarizations: Optional[list[tuple[PolarizationVector, ...]]] = None,
) -> MultipartyModel:
    """N-party axiom-compliant model; every later party's photon is a random decomposition of its polarization."""
    n = len(settings)
    shape = tuple(len(d) for d in settings)
    subs = []
    weights = rng.dirichlet(np.ones(n_subensembles))
    for index in range(n_subensembles):
        pols = polarizations[index] if polarizations else tuple(random_direction(rng) for _ in range(n))
        malus = []
        for j in range(n):
            k = pols[j].ket / np.sqrt(pols[j].norm_sq)
            detect = np.array([abs(np.vdot(d.ket / np.sqrt(d.norm_sq), k)) ** 2 for d in settings[j]])
            malus.append(np.column_stack([detect, 1.0 - detect]))
        table = np.ones(())
        for m in malus:
            table = np.multiply.outer(table, m)
        table = table.transpose(tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2)))
        ensembles = {}
        for j in range(1, n):
            target = DensityMatrix.pure(pols[j])
            for xs in itertools.product(*(range(m) for m in shape[:j])):
                for outs in itertools.product((0, 1), repeat=j):
                    ensembles[(j, xs, outs)] = rejection_decomposition(rng, target, parts)
        subs.append(MultipartySubensemble(float(weights[index]), tuple(pols), table, ensembles))
    return MultipartyModel(settings=tuple(tuple(d) for d in settings), subensembles=tuple(subs))
