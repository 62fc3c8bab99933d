"""Executable version of the realistic-polarization argument.

Inside a subensemble (u, v) Alice measures first. Her photon has the definite
polarization u, so her outcomes follow Malus' law; Bob's photon, after
post-selection on Alice's result, is again a photon with some polarization
mixture rho^x_a(u, v). Averaging over Alice's outcomes must give back |v><v|,
and a pure state has only trivial convex decompositions, so every
rho^x_a(u, v) equals |v><v|. The conditionals then factorize into products of
Malus probabilities and the statistics are those of a separable state.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.config import DEFAULT, ToleranceProfile
from src.engine.behavior import party_effects
from src.engine.crypto_nonlocal import local_response
from src.engine.linalg import Side, hermitian_eigensystem, partial_trace, trace_distance
from src.engine.polarization import projector
from src.models.axiom import AxiomModel, MultipartyModel, MultipartySubensemble, PostSelectionEnsemble
from src.models.behavior import Behavior, SettingsSet
from src.models.errors import (
    InvalidStateError,
    ModelInconsistentError,
    ParameterRangeError,
    PremiseViolation,
    ShapeError,
)
from src.models.matrix import CMatrix
from src.models.polarization import DensityMatrix, PolarizationVector
from src.models.subensemble import SubensembleModel

logger = logging.getLogger(__name__)

PREMISE_TOL = 1e-10
CONSISTENCY_TOL = 1e-10
PRODUCT_TOL = 1e-8
NEGLIGIBLE = 1e-12

Mixture = tuple[tuple[float, PolarizationVector], ...]


def _mixture_state(mixture: Mixture) -> DensityMatrix:
    rho = sum(w * z.projector_matrix() for w, z in mixture)
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(CMatrix(rho / np.trace(rho).real))


def conditional_state(e: PostSelectionEnsemble) -> DensityMatrix:
    """sum_w mu(w) |w><w| for the post-selected photon."""
    return _mixture_state(e.mixture)


@dataclass
class PurityReport:
    """Outcome of checking that a decomposition of |v><v| is trivial.

    ``premise_violated`` means the parts do not even average to |v><v|; in that
    case ``holds`` is False and ``max_deviation`` is None.
    """

    holds: bool
    max_deviation: Optional[float]
    mixture_gap: float
    premise_violated: bool = False

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "maxDeviation": self.max_deviation,
            "mixtureGap": self.mixture_gap,
            "premiseViolated": self.premise_violated,
        }


def purity_forcing_check(
    v: PolarizationVector,
    parts: list[tuple[float, DensityMatrix]],
    tol: ToleranceProfile = DEFAULT,
) -> PurityReport:
    """Check that sum_a P(a) rho_a = |v><v| forces rho_a = |v><v| whenever P(a) > 0."""
    if not parts:
        raise ParameterRangeError("need at least one part")
    probs = np.array([p for p, _ in parts], dtype=float)
    if np.any(probs < -NEGLIGIBLE) or abs(probs.sum() - 1.0) > PREMISE_TOL:
        raise ParameterRangeError(f"part probabilities must be non-negative and sum to 1 (sum {probs.sum():.12g})")
    target = v.projector_matrix()
    mixture = sum(p * rho.data for p, rho in parts)
    gap = float(np.max(np.abs(mixture - target)))
    if gap > PREMISE_TOL:
        return PurityReport(holds=False, max_deviation=None, mixture_gap=gap, premise_violated=True)
    pure = CMatrix(target)
    deviation = max((trace_distance(rho, pure) for p, rho in parts if p > NEGLIGIBLE), default=0.0)
    return PurityReport(holds=deviation <= tol.purity, max_deviation=deviation, mixture_gap=gap)


@dataclass
class AxiomReport:
    product_form: bool
    reconstructed: SubensembleModel
    max_deviation: float
    max_purity_deviation: float
    checks: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "productForm": self.product_form,
            "maxDeviation": self.max_deviation,
            "maxPurityDeviation": self.max_purity_deviation,
            "subensembles": len(self.reconstructed),
            "checks": self.checks,
        }


def _product_conditionals(model: SubensembleModel) -> np.ndarray:
    ma = local_response(model.grid_u, model.settings, "A")[model.pairs[:, 0]]  # (K, nA)
    mb = local_response(model.grid_v, model.settings, "B")[model.pairs[:, 1]]  # (K, nB)
    alice = np.stack([ma, 1.0 - ma], axis=-1)  # (K, nA, 2)
    bob = np.stack([mb, 1.0 - mb], axis=-1)  # (K, nB, 2)
    return np.einsum("kxa,kyb->kxyab", alice, bob)


def _check_consistency(m: AxiomModel) -> None:
    """Precondition: Alice follows Malus and Bob's conditionals follow his post-selected photons."""
    model = m.model
    eb = party_effects(model.settings, "B")  # (nB, 2, 2, 2)
    ma = local_response(model.grid_u, model.settings, "A")[model.pairs[:, 0]]
    for k in range(len(model)):
        cond = model.conditionals[k]
        for x in range(model.settings.n_alice):
            for a in (0, 1):
                pa = float(cond[x, 0, a, :].sum())
                malus = ma[k, x] if a == 0 else 1.0 - ma[k, x]
                if abs(pa - malus) > CONSISTENCY_TOL:
                    raise ModelInconsistentError(
                        f"pair {k}: Alice marginal {pa:.12g} at x={x}, a={a} breaks Malus' law ({malus:.12g})"
                    )
                rho = conditional_state(m.ensembles[(k, x, a)]).data
                predicted = pa * np.einsum("ij,ybji->yb", rho, eb).real
                gap = float(np.max(np.abs(cond[x, :, a, :] - predicted)))
                if gap > CONSISTENCY_TOL:
                    raise ModelInconsistentError(
                        f"pair {k}: conditionals at x={x}, a={a} disagree with the post-selected photon by {gap:.3g}"
                    )


def enforce_axioms(m: AxiomModel, tol: ToleranceProfile = DEFAULT) -> AxiomReport:
    """Apply purity forcing to every subensemble and compare with product conditionals."""
    _check_consistency(m)
    model = m.model
    checks = []
    purity_worst = 0.0
    all_hold = True
    for k in range(len(model)):
        v = model.v(k)
        for x in range(model.settings.n_alice):
            parts = [
                (float(model.conditionals[k, x, 0, a, :].sum()), conditional_state(m.ensembles[(k, x, a)]))
                for a in (0, 1)
            ]
            report = purity_forcing_check(v, parts, tol)
            if report.premise_violated:
                context = {"pair": k, "u": int(model.pairs[k, 0]), "v": int(model.pairs[k, 1]), "x": x,
                           "mixtureGap": report.mixture_gap}
                raise PremiseViolation(
                    f"post-selected photons of pair {k} at x={x} average to a state {report.mixture_gap:.3g} "
                    f"away from |v><v|", context,
                )
            purity_worst = max(purity_worst, report.max_deviation)
            all_hold = all_hold and report.holds
            checks.append({"pair": k, "x": x, **report.to_dict()})

    product = _product_conditionals(model)
    deviation = float(np.max(np.abs(model.conditionals - product), initial=0.0))
    reconstructed = SubensembleModel(
        settings=model.settings, grid_u=model.grid_u, grid_v=model.grid_v,
        pairs=model.pairs, weights=model.weights, conditionals=product,
    )
    product_form = all_hold and deviation <= PRODUCT_TOL
    logger.info("Axiom enforcement: product form %s, deviation %.3g", product_form, deviation)
    return AxiomReport(product_form, reconstructed, deviation, purity_worst, checks)


@dataclass
class WeakModel:
    """Decomposition in which only Alice's subensembles obey Malus' law.

    ``conditionals[i]`` is P(a,b|x,y,u_i,v) for Alice's i-th spectral
    direction; it does not depend on v. ``bob_malus_gap`` is the largest
    deviation of a subensemble's Bob marginal from |<y|v>|^2 and
    ``signalling`` the largest dependence of that marginal on Alice's setting.
    """

    settings: SettingsSet
    alice_terms: list[tuple[float, PolarizationVector]]
    bob_terms: list[tuple[float, PolarizationVector]]
    conditionals: np.ndarray
    witness: bool
    bob_malus_gap: float
    signalling: float

    def average_table(self) -> np.ndarray:
        weights = np.array([w for w, _ in self.alice_terms])
        return np.einsum("u,uxyab->xyab", weights, self.conditionals)

    def average(self) -> Behavior:
        return Behavior(self.average_table())

    def to_dict(self) -> dict:
        return {
            "witness": self.witness,
            "alice": [{"weight": w, "u": z.to_dict()} for w, z in self.alice_terms],
            "bob": [{"weight": w, "v": z.to_dict()} for w, z in self.bob_terms],
            "conditionals": self.conditionals.tolist(),
            "bobMalusGap": self.bob_malus_gap,
            "subensembleSignalling": self.signalling,
        }


def _local_terms(mat: CMatrix) -> list[tuple[float, PolarizationVector]]:
    """Spectral terms of a one-photon operator; weights may be negative for witnesses."""
    terms = []
    for value, vector in hermitian_eigensystem(mat):
        if abs(value) > NEGLIGIBLE:
            terms.append((value, PolarizationVector(vector[0], vector[1]).canonical()))
    return terms


def weak_model(rho: DensityMatrix, s: SettingsSet, allow_witness: bool = False) -> WeakModel:
    """Reproduce any two-photon state's statistics with Malus' law on Alice's side only."""
    if rho.dim != 4:
        raise ShapeError(f"weak_model needs a two-photon operator, got dimension {rho.dim}")
    if rho.witness and not allow_witness:
        raise InvalidStateError("witness input requires allow_witness=True")
    alice_terms = _local_terms(partial_trace(rho, Side.A))
    bob_terms = _local_terms(partial_trace(rho, Side.B))

    ea = party_effects(s, "A")
    eb = party_effects(s, "B")
    r = rho.data.reshape(2, 2, 2, 2)
    sigma = np.einsum("xaji,ikjl->xakl", ea, r)  # tr_A((E^x_a (x) I) rho)
    norms = np.einsum("xakk->xa", sigma).real
    safe = np.abs(norms) > NEGLIGIBLE
    states = np.where(safe[..., None, None], sigma / np.where(safe, norms, 1.0)[..., None, None],
                      np.eye(2) / 2.0)
    bob_prob = np.einsum("xakl,yblk->xayb", states, eb).real

    kets_u = np.array([z.ket for _, z in alice_terms])
    alice_malus = np.einsum("ui,xaij,uj->uxa", kets_u.conj(), ea, kets_u).real
    cond = np.einsum("uxa,xayb->uxyab", alice_malus, bob_prob)

    bob_marginal = cond.sum(axis=3)  # (U, nA, nB, 2)
    kets_v = np.array([z.ket for _, z in bob_terms])
    bob_malus = np.einsum("vi,ybij,vj->vyb", kets_v.conj(), eb, kets_v).real
    gap = float(np.max(np.abs(bob_marginal[:, None] - bob_malus[None, :, None]), initial=0.0))
    signalling = float(np.max(bob_marginal.max(axis=1) - bob_marginal.min(axis=1), initial=0.0))
    logger.info("Weak model: %d x %d terms, Bob Malus gap %.3g, signalling %.3g",
                len(alice_terms), len(bob_terms), gap, signalling)
    return WeakModel(s, alice_terms, bob_terms, cond, rho.witness, gap, signalling)


@dataclass
class InductionReport:
    fully_separable: bool
    max_deviation: float
    max_purity_deviation: float
    product_tables: list[np.ndarray] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "fullySeparable": self.fully_separable,
            "maxDeviation": self.max_deviation,
            "maxPurityDeviation": self.max_purity_deviation,
        }


def _party_effects(directions: tuple[PolarizationVector, ...]) -> np.ndarray:
    out = np.empty((len(directions), 2, 2, 2), dtype=complex)
    for i, z in enumerate(directions):
        out[i, 0] = projector(z, 0).matrix.data
        out[i, 1] = projector(z, 1).matrix.data
    return out


def _leading_marginal(table: np.ndarray, n: int, keep: int) -> np.ndarray:
    """Table of parties 0..keep-1, later parties fixed to setting 0 and summed out."""
    index = (slice(None),) * keep + (0,) * (n - keep)
    reduced = table[index]
    return reduced.sum(axis=tuple(range(2 * keep, keep + n))) if keep < n else reduced


def _malus(effects: np.ndarray, v: PolarizationVector) -> np.ndarray:
    """(n_settings, 2) detection table of polarization v."""
    k = v.ket / np.sqrt(v.norm_sq)
    return np.einsum("i,xaij,j->xa", k.conj(), effects, k).real


def _induct(
    index: int,
    sub: MultipartySubensemble,
    effects: list[np.ndarray],
    tol: ToleranceProfile,
) -> tuple[bool, float, np.ndarray]:
    n = sub.parties
    holds = True
    worst = 0.0
    for j in range(n - 1, 0, -1):
        marg = _leading_marginal(sub.table, n, j + 1)  # (x_0..x_j, a_0..a_j)
        for xs in itertools.product(*(range(len(e)) for e in effects[:j])):
            parts = []
            for outs in itertools.product((0, 1), repeat=j):
                block = marg[xs + (slice(None),) + outs]  # (x_j, a_j)
                p_prev = float(block[0].sum())
                mixture = sub.ensembles.get((j, xs, outs))
                if mixture is None:
                    if p_prev > NEGLIGIBLE:
                        raise ModelInconsistentError(
                            f"subensemble {index}: no post-selected photon for party {j} after {xs}/{outs}")
                    continue
                rho = _mixture_state(mixture)
                predicted = p_prev * np.einsum("ij,xaji->xa", rho.data, effects[j]).real
                gap = float(np.max(np.abs(block - predicted)))
                if gap > CONSISTENCY_TOL:
                    raise ModelInconsistentError(
                        f"subensemble {index}: party {j} conditionals after {xs}/{outs} disagree by {gap:.3g}")
                parts.append((p_prev, rho))
            total = sum(p for p, _ in parts)
            parts = [(p / total, rho) for p, rho in parts]
            report = purity_forcing_check(sub.polarizations[j], parts, tol)
            if report.premise_violated:
                raise PremiseViolation(
                    f"subensemble {index}: party {j} post-selected photons after settings {xs} do not average "
                    f"to its polarization (gap {report.mixture_gap:.3g})",
                    {"subensemble": index, "party": j, "settings": list(xs), "mixtureGap": report.mixture_gap},
                )
            worst = max(worst, report.max_deviation)
            holds = holds and report.holds

    first = _leading_marginal(sub.table, n, 1)
    if float(np.max(np.abs(first - _malus(effects[0], sub.polarizations[0])))) > CONSISTENCY_TOL:
        raise ModelInconsistentError(f"subensemble {index}: first party breaks Malus' law")

    product = np.ones(())
    for j in range(n):
        product = np.multiply.outer(product, _malus(effects[j], sub.polarizations[j]))
    # outer product interleaves (x_j, a_j); reorder to (x_0..x_{n-1}, a_0..a_{n-1})
    product = product.transpose(tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2)))
    return holds, worst, product


def multiparty_induction_check(model: MultipartyModel, tol: ToleranceProfile = DEFAULT) -> InductionReport:
    """Peel off the last party by purity forcing, then recurse on the rest."""
    effects = [_party_effects(d) for d in model.settings]
    holds = True
    purity_worst = 0.0
    deviation = 0.0
    tables = []
    for index, sub in enumerate(model.subensembles):
        ok, worst, product = _induct(index, sub, effects, tol)
        holds = holds and ok
        purity_worst = max(purity_worst, worst)
        deviation = max(deviation, float(np.max(np.abs(sub.table - product))))
        tables.append(product)
    separable = holds and deviation <= PRODUCT_TOL
    logger.info("%d-party induction: fully separable %s, deviation %.3g", model.parties, separable, deviation)
    return InductionReport(separable, deviation, purity_worst, tables)
