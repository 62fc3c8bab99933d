"""Membership in the crypto-nonlocal set and Bell optimization over it.

A behavior admits a crypto-nonlocal model when it is a mixture of
subensembles labelled by definite polarizations (u, v) whose local marginals
follow Malus' law, P(a|x,u,v) = tr(|u><u| E^x_a) and P(b|y,u,v) =
tr(|v><v| E^y_b). The continuum of polarizations is replaced by two grids;
the products mu = P(u,v) P(a,b|x,y,u,v) make every constraint linear.

Only mu(0,0|x,y) is a free table entry per pair. The other three follow from
the pair weight p and the unnormalized marginals alpha_x = sum_b mu(0,b|x,y)
and beta_y = sum_a mu(a,0|x,y), which are shared across the other party's
settings (each subensemble is non-signalling). At slack 0 the marginals are
pinned to p times the Malus values and drop out of the program.

Refutation relaxes every subensemble by the grids' covering chords. With
``slack="auto"`` a party's marginals move together: they are the Malus
values of the grid point displaced by one vector D, |D| <= chord, so the
relaxed program still holds every continuum model rounded onto the grids.
An explicit slack instead widens each marginal on its own.

Grids of a few thousand points give millions of pairs. The programs are
solved over a working set of pairs; a pricing pass bounds, in closed form,
what any pair left out could contribute against the current dual ray, and
adds the pairs that could. A restricted infeasibility certificate counts
only together with a pricing bound showing that no left-out pair matters.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Union

import numpy as np
import scipy.sparse as sp

from src.config import DEFAULT, ToleranceProfile
from src.engine.behavior import party_effects
from src.engine.grid import certify_grid, slack_bound
from src.engine.lp import solve
from src.models.behavior import Behavior, BellFunctional, SettingsSet
from src.models.errors import ParameterRangeError, ShapeError
from src.models.grid import PolarizationGrid
from src.models.program import FeasibilityCertificate, LinearProgram, LPResult, LPStatus
from src.models.subensemble import SubensembleModel

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12
PRUNE_MARGIN = 1e-12
COLUMN_BATCH = 2000
MAX_ROUNDS = 50
PRICING_CELLS = 1_000_000
# a ball of radius r lies inside |D_i| <= r and |D|_1 <= sqrt(3) r
OCTAHEDRAL = math.sqrt(3.0)

_SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)

Slack = Union[str, float]


class MembershipStatus(Enum):
    MEMBER = "member"
    REFUTED = "refuted"
    UNDECIDED = "undecided"


class Relaxation(Enum):
    EXACT = "exact"
    BOX = "box"
    ROUNDING = "rounding"


@dataclass
class PricingBound:
    """What the grid pairs left out of a restricted program could do to its verdict.

    For a membership certificate ``margin`` is the restricted Farkas margin
    minus the worst left-out contribution; for an optimum it is the optimum
    minus the best left-out value. ``ok`` means the verdict covers every pair.
    """

    ok: bool
    margin: float
    pairs_priced: int
    worst: float

    def to_dict(self) -> dict:
        def finite(value: float) -> Optional[float]:
            return value if math.isfinite(value) else None

        return {"ok": self.ok, "margin": finite(self.margin), "pairsPriced": self.pairs_priced,
                "worst": finite(self.worst)}


@dataclass
class MembershipResult:
    status: MembershipStatus
    slack: float
    auto_slack: float
    certificate: Optional[FeasibilityCertificate] = None
    model: Optional[SubensembleModel] = None
    program: Optional[LinearProgram] = None
    pairs_total: int = 0
    pairs_kept: int = 0
    pairs_used: int = 0
    relaxation: Relaxation = Relaxation.EXACT
    pricing: Optional[PricingBound] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "slack": self.slack,
            "autoSlack": self.auto_slack,
            "relaxation": self.relaxation.value,
            "pairsTotal": self.pairs_total,
            "pairsKept": self.pairs_kept,
            "pairsUsed": self.pairs_used,
            "message": self.message,
            "pricing": self.pricing.to_dict() if self.pricing else None,
            "certificate": self.certificate.to_dict() if self.certificate else None,
        }


@dataclass
class BellOptimum:
    status: LPStatus
    value: Optional[float] = None
    model: Optional[SubensembleModel] = None
    certificate: Optional[FeasibilityCertificate] = None
    pricing: Optional[PricingBound] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "value": self.value,
            "message": self.message,
            "pricing": self.pricing.to_dict() if self.pricing else None,
        }


def effect_coefficients(settings: SettingsSet, side: str) -> tuple[np.ndarray, np.ndarray]:
    """Detection effects written as e0 I + e.sigma, shapes (n,) and (n, 3)."""
    effects = party_effects(settings, side)[:, 0]
    e0 = np.trace(effects, axis1=1, axis2=2).real / 2.0
    e = np.einsum("xij,kji->xk", effects, _SIGMA).real / 2.0
    return e0, e


def local_response(grid: PolarizationGrid, settings: SettingsSet, side: str) -> np.ndarray:
    """Detection probabilities tr(|u><u| E^x_0) = e0 + e.r(u), shape (len(grid), n_settings)."""
    e0, e = effect_coefficients(settings, side)
    return np.clip(e0 + grid.bloch @ e.T, 0.0, 1.0)


class _Rows:
    """Sparse constraint rows assembled from broadcast index/value blocks."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self.count = 0

    def new(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        ids = self.count + np.arange(rhs.size).reshape(rhs.shape)
        self._rhs.append(rhs.ravel())
        self.count += rhs.size
        return ids

    def put(self, ids, cols, vals) -> None:
        shape = np.broadcast_shapes(np.shape(ids), np.shape(cols), np.shape(vals))
        for target, arr in ((self._rows, ids), (self._cols, cols), (self._vals, vals)):
            target.append(np.broadcast_to(arr, shape).ravel())

    def put_terms(self, ids, terms, sign: float) -> None:
        """Add a linear expression given as (cols, vals) blocks with a trailing term axis."""
        ids = np.asarray(ids)[..., None]
        for cols, vals in terms:
            self.put(ids, cols, sign * np.asarray(vals, dtype=float))

    def matrix(self) -> sp.csr_array:
        if not self._rows:
            return sp.csr_array((self.count, self.n_vars))
        coo = sp.coo_array(
            (np.concatenate(self._vals), (np.concatenate(self._rows), np.concatenate(self._cols))),
            shape=(self.count, self.n_vars),
        )
        return coo.tocsr()

    def rhs(self) -> np.ndarray:
        return np.concatenate(self._rhs) if self._rhs else np.zeros(0)


@dataclass
class _PairSpace:
    """Detection probabilities on both grids and the (u, v) pairs that survive pruning."""

    resp_u: np.ndarray
    resp_v: np.ndarray
    mask: np.ndarray

    @property
    def total(self) -> int:
        return int(self.mask.size)

    @property
    def kept(self) -> int:
        return int(np.count_nonzero(self.mask))

    def pairs(self, flat: np.ndarray) -> np.ndarray:
        return np.column_stack(np.unravel_index(flat, self.mask.shape)).astype(int).reshape(-1, 2)

    def spread(self, count: int) -> np.ndarray:
        """Flat ids of about ``count`` kept pairs spread evenly, or all of them if fewer."""
        per_row = np.count_nonzero(self.mask, axis=1)
        kept = int(per_row.sum())
        if kept <= count:
            return np.flatnonzero(self.mask)
        ranks = np.linspace(0, kept - 1, count).astype(np.int64)
        ends = np.cumsum(per_row)
        starts = ends - per_row
        rows = np.searchsorted(ends, ranks, side="right")
        nv = self.mask.shape[1]
        out = np.empty(count, dtype=np.int64)
        for i, (row, rank) in enumerate(zip(rows, ranks)):
            out[i] = row * nv + np.flatnonzero(self.mask[row])[rank - starts[row]]
        return np.unique(out)


@dataclass
class _Columns:
    """The pairs of a restricted program with their detection probabilities."""

    flat: np.ndarray
    pairs: np.ndarray
    ma: np.ndarray
    mb: np.ndarray

    @property
    def size(self) -> int:
        return self.pairs.shape[0]


def _columns(space: _PairSpace, flat: np.ndarray) -> _Columns:
    pairs = space.pairs(flat)
    return _Columns(flat=flat, pairs=pairs, ma=space.resp_u[pairs[:, 0]], mb=space.resp_v[pairs[:, 1]])


def _prune(b: Behavior, resp_u: np.ndarray, resp_v: np.ndarray, eps_a: np.ndarray, eps_b: np.ndarray) -> np.ndarray:
    """Mask over (u, v) of pairs that can carry positive weight.

    A zero table entry forces mu(a,b|x,y) = 0, while every pair has
    mu(a,b|x,y) >= p (M_A(a) + M_B(b) - 1 - eps_A(x) - eps_B(y)) when its
    marginals may move by eps. A zero marginal forces the pair's own
    marginal, and hence its Malus value, to within eps.
    """
    alice_u = np.stack([resp_u, 1.0 - resp_u], axis=-1)  # (nu, nA, 2)
    bob_v = np.stack([resp_v, 1.0 - resp_v], axis=-1)  # (nv, nB, 2)

    zero_a = b.alice_marginals().min(axis=1) <= 0.0  # (nA, 2)
    zero_b = b.bob_marginals().min(axis=0) <= 0.0  # (nB, 2)
    ok_u = ~np.any((alice_u > eps_a[:, None] + PRUNE_MARGIN) & zero_a, axis=(1, 2))
    ok_v = ~np.any((bob_v > eps_b[:, None] + PRUNE_MARGIN) & zero_b, axis=(1, 2))
    mask = ok_u[:, None] & ok_v[None, :]

    for x, y, a, bb in zip(*np.nonzero(b.table <= 0.0)):
        limit = 1.0 + eps_a[x] + eps_b[y] + PRUNE_MARGIN
        mask &= ~(alice_u[:, x, a][:, None] + bob_v[:, y, bb][None, :] > limit)
    return mask


def _space(
    b: Optional[Behavior],
    resp_u: np.ndarray,
    resp_v: np.ndarray,
    eps_a: np.ndarray,
    eps_b: np.ndarray,
    prune: bool,
) -> _PairSpace:
    total = resp_u.shape[0] * resp_v.shape[0]
    if b is not None and prune:
        mask = _prune(b, resp_u, resp_v, eps_a, eps_b)
        logger.info("Pruned grid pairs at slack %.3g: kept %d of %d",
                    float(max(eps_a.max(), eps_b.max())), int(np.count_nonzero(mask)), total)
    else:
        mask = np.ones((resp_u.shape[0], resp_v.shape[0]), dtype=bool)
    return _PairSpace(resp_u=resp_u, resp_v=resp_v, mask=mask)


def _link(ub: _Rows, eq: _Rows, b: Optional[Behavior], p: np.ndarray, m: np.ndarray, alice, bob) -> None:
    """Frechet rows for mu(0,0) and the equalities matching the behavior.

    ``alice`` and ``bob`` express alpha_x and beta_y as term blocks shaped
    (k, nA, 1, r) and (k, 1, nB, r).
    """
    k, na, nb = m.shape
    ids = ub.new(np.zeros((k, na, nb)))
    ub.put(ids, m, 1.0)
    ub.put_terms(ids, alice, -1.0)
    ids = ub.new(np.zeros((k, na, nb)))
    ub.put(ids, m, 1.0)
    ub.put_terms(ids, bob, -1.0)
    ids = ub.new(np.zeros((k, na, nb)))
    ub.put_terms(ids, alice, 1.0)
    ub.put_terms(ids, bob, 1.0)
    ub.put(ids, m, -1.0)
    ub.put(ids, p[:, None, None], -1.0)

    if b is not None:
        t = b.table
        ids = eq.new(t[:, :, 0, 0])
        eq.put(ids[None], m, 1.0)
        ids = eq.new(t[:, :, 0, 1])
        eq.put_terms(ids[None], alice, 1.0)
        eq.put(ids[None], m, -1.0)
        ids = eq.new(t[:, :, 1, 0])
        eq.put_terms(ids[None], bob, 1.0)
        eq.put(ids[None], m, -1.0)
    ids = eq.new(np.ones(1))
    eq.put(ids, p, 1.0)


def _exact_program(cols: _Columns, b: Optional[Behavior], objective: Optional[BellFunctional]) -> LinearProgram:
    """Slack-0 program over (p_k, mu_k(0,0|x,y))."""
    k, na = cols.ma.shape
    nb = cols.mb.shape[1]
    p = np.arange(k)
    m = k + np.arange(k * na * nb).reshape(k, na, nb)
    n_vars = k + k * na * nb
    pk = p[:, None, None, None]

    ub, eq = _Rows(n_vars), _Rows(n_vars)
    _link(ub, eq, b, p, m, [(pk, cols.ma[:, :, None, None])], [(pk, cols.mb[:, None, :, None])])

    c = None
    if objective is not None:
        coef = objective.coefficients
        c00, c01, c10, c11 = coef[:, :, 0, 0], coef[:, :, 0, 1], coef[:, :, 1, 0], coef[:, :, 1, 1]
        c = np.zeros(n_vars)
        c[m] = np.broadcast_to(c00 - c01 - c10 + c11, (k, na, nb))
        c[p] = (cols.ma @ (c01 - c11).sum(axis=1) + cols.mb @ (c10 - c11).sum(axis=0) + c11.sum())

    return LinearProgram.build(n_vars, eq.matrix(), eq.rhs(), ub.matrix(), ub.rhs(), objective=c)


def _box_program(cols: _Columns, b: Behavior, eps_a: np.ndarray, eps_b: np.ndarray) -> LinearProgram:
    """Program over (p_k, alpha_k(x), beta_k(y), mu_k(0,0|x,y)) with each marginal within eps * p."""
    k, na = cols.ma.shape
    nb = cols.mb.shape[1]
    p = np.arange(k)
    alpha = k + np.arange(k * na).reshape(k, na)
    beta = k + k * na + np.arange(k * nb).reshape(k, nb)
    m = k + k * na + k * nb + np.arange(k * na * nb).reshape(k, na, nb)
    n_vars = k + k * na + k * nb + k * na * nb

    ub, eq = _Rows(n_vars), _Rows(n_vars)
    for var, resp, eps in ((alpha, cols.ma, eps_a), (beta, cols.mb, eps_b)):
        pk = np.broadcast_to(p[:, None], resp.shape)
        width = np.broadcast_to(eps, resp.shape)
        upper = resp + width < 1.0
        if upper.any():
            ids = ub.new(np.zeros(int(upper.sum())))
            ub.put(ids, var[upper], 1.0)
            ub.put(ids, pk[upper], -(resp[upper] + width[upper]))
        lower = resp - width > 0.0
        if lower.any():
            ids = ub.new(np.zeros(int(lower.sum())))
            ub.put(ids, var[lower], -1.0)
            ub.put(ids, pk[lower], resp[lower] - width[lower])

    _link(ub, eq, b, p, m, [(alpha[:, :, None, None], 1.0)], [(beta[:, None, :, None], 1.0)])
    return LinearProgram.build(n_vars, eq.matrix(), eq.rhs(), ub.matrix(), ub.rhs())


def _rounding_program(
    cols: _Columns,
    b: Behavior,
    ea: np.ndarray,
    eb: np.ndarray,
    chord_a: float,
    chord_b: float,
) -> LinearProgram:
    """Program whose marginals are Malus values of displaced grid points.

    alpha_k(x) = p_k M_k(x) + e_x.D_k with D_k = D+ - D-, and the same for
    Bob. D_k/p_k lies within the chord of the grid point, enclosed by a cube
    and an octahedron, and no single marginal moves by more than |e_x| chord.
    """
    k, na = cols.ma.shape
    nb = cols.mb.shape[1]
    p = np.arange(k)
    da = k + np.arange(6 * k).reshape(k, 2, 3)
    db = 7 * k + np.arange(6 * k).reshape(k, 2, 3)
    m = 13 * k + np.arange(k * na * nb).reshape(k, na, nb)
    n_vars = 13 * k + k * na * nb

    ub, eq = _Rows(n_vars), _Rows(n_vars)
    for d, e, chord in ((da, ea, chord_a), (db, eb, chord_b)):
        ids = ub.new(np.zeros((k, 3)))
        ub.put(ids, d[:, 0, :], 1.0)
        ub.put(ids, d[:, 1, :], 1.0)
        ub.put(ids, p[:, None], -chord)
        ids = ub.new(np.zeros(k))
        ub.put(ids[:, None], d[:, 0, :], 1.0)
        ub.put(ids[:, None], d[:, 1, :], 1.0)
        ub.put(ids, p, -OCTAHEDRAL * chord)
        reach = np.linalg.norm(e, axis=1) * chord
        for sign in (1.0, -1.0):
            ids = ub.new(np.zeros((k, e.shape[0])))
            ub.put(ids[..., None], d[:, None, 0, :], sign * e[None])
            ub.put(ids[..., None], d[:, None, 1, :], -sign * e[None])
            ub.put(ids, p[:, None], -reach[None])

    pk = p[:, None, None, None]
    alice = [
        (pk, cols.ma[:, :, None, None]),
        (da[:, None, None, 0, :], ea[None, :, None, :]),
        (da[:, None, None, 1, :], -ea[None, :, None, :]),
    ]
    bob = [
        (pk, cols.mb[:, None, :, None]),
        (db[:, None, None, 0, :], eb[None, None, :, :]),
        (db[:, None, None, 1, :], -eb[None, None, :, :]),
    ]
    _link(ub, eq, b, p, m, alice, bob)
    return LinearProgram.build(n_vars, eq.matrix(), eq.rhs(), ub.matrix(), ub.rhs())


@dataclass
class _Prices:
    """A linear function of one pair's table per unit weight:

    offset + sum_xy [d01 alpha_x + d10 beta_y + k mu(0,0|x,y)].
    """

    d01: np.ndarray
    d10: np.ndarray
    k: np.ndarray
    offset: float

    @classmethod
    def from_ray(cls, y: np.ndarray, na: int, nb: int) -> _Prices:
        n = na * nb
        y00, y01, y10 = (y[i * n:(i + 1) * n].reshape(na, nb) for i in range(3))
        return cls(d01=y01, d10=y10, k=y00 - y01 - y10, offset=float(y[3 * n]))

    @classmethod
    def from_functional(cls, f: BellFunctional) -> _Prices:
        """Minus the functional, so the smallest value is minus the pair's best one."""
        coef = f.coefficients
        c00, c01, c10, c11 = coef[:, :, 0, 0], coef[:, :, 0, 1], coef[:, :, 1, 0], coef[:, :, 1, 1]
        return cls(d01=c11 - c01, d10=c11 - c10, k=-(c00 - c01 - c10 + c11), offset=-float(c11.sum()))


def _term_minimum(au0, au1, bv0, bv1, prices: _Prices, exact: bool) -> np.ndarray:
    """Smallest d01 alpha + d10 beta + min_q k q per table term over a box of marginals.

    q ranges over [max(0, alpha+beta-1), min(alpha, beta)], so each term is
    convex and piecewise linear with one crease (alpha = beta when k < 0,
    alpha + beta = 1 when k > 0); the minimum sits at a corner of the box or
    where the crease meets an edge.
    """
    d01, d10, k = prices.d01, prices.d10, prices.k

    def value(a, bb):
        low = np.maximum(0.0, a + bb - 1.0)
        high = np.minimum(a, bb)
        return d01 * a + d10 * bb + np.where(k > 0.0, k * low, k * high)

    if exact:
        return value(au0, bv0)
    best = np.minimum(np.minimum(value(au0, bv0), value(au0, bv1)), np.minimum(value(au1, bv0), value(au1, bv1)))
    diagonal = k < 0.0
    for edge in (au0, au1):
        other = np.where(diagonal, edge, 1.0 - edge)
        inside = (other >= bv0) & (other <= bv1)
        best = np.minimum(best, np.where(inside, value(edge, other), np.inf))
    for edge in (bv0, bv1):
        other = np.where(diagonal, edge, 1.0 - edge)
        inside = (other >= au0) & (other <= au1)
        best = np.minimum(best, np.where(inside, value(other, edge), np.inf))
    return best


def _pair_bounds(
    space: _PairSpace,
    prices: _Prices,
    eps_a: np.ndarray,
    eps_b: np.ndarray,
) -> Iterator[tuple[slice, np.ndarray]]:
    """Lower bounds of ``prices`` over every pair's relaxed tables, in chunks of u rows.

    Alice's marginals are minimized independently for each of Bob's settings,
    which can only lower the bound.
    """
    nu, nv = space.mask.shape
    na, nb = prices.k.shape
    exact = not (np.any(eps_a > 0.0) or np.any(eps_b > 0.0))
    bv0 = np.clip(space.resp_v - eps_b, 0.0, 1.0)[None, :, None, :]
    bv1 = np.clip(space.resp_v + eps_b, 0.0, 1.0)[None, :, None, :]
    step = max(1, PRICING_CELLS // max(1, nv * na * nb))
    for start in range(0, nu, step):
        rows = slice(start, min(nu, start + step))
        resp = space.resp_u[rows]
        au0 = np.clip(resp - eps_a, 0.0, 1.0)[:, None, :, None]
        au1 = np.clip(resp + eps_a, 0.0, 1.0)[:, None, :, None]
        terms = _term_minimum(au0, au1, bv0, bv1, prices, exact)
        yield rows, terms.sum(axis=(2, 3)) + prices.offset


def _price(
    space: _PairSpace,
    prices: _Prices,
    eps_a: np.ndarray,
    eps_b: np.ndarray,
    used: np.ndarray,
    cut: float,
) -> tuple[float, int, np.ndarray, np.ndarray]:
    """Worst bound over kept pairs outside ``used``, how many were priced, and the pairs below ``cut``."""
    nv = space.mask.shape[1]
    worst = math.inf
    priced = 0
    ids, bounds = [], []
    for rows, bound in _pair_bounds(space, prices, eps_a, eps_b):
        live = space.mask[rows] & ~used[rows]
        if not live.any():
            continue
        values = bound[live]
        priced += values.size
        worst = min(worst, float(values.min()))
        hit = live & (bound < cut)
        if hit.any():
            r, c = np.nonzero(hit)
            ids.append((r + rows.start) * nv + c)
            bounds.append(bound[hit])
    if not ids:
        return worst, priced, np.zeros(0, dtype=np.int64), np.zeros(0)
    return worst, priced, np.concatenate(ids), np.concatenate(bounds)


@dataclass
class _Stage:
    """Where column generation ended for one program family."""

    result: LPResult
    program: LinearProgram
    columns: _Columns
    pricing: Optional[PricingBound] = None
    rounds: int = 0


def _generate(
    space: _PairSpace,
    build: Callable[[_Columns], LinearProgram],
    eps_a: np.ndarray,
    eps_b: np.ndarray,
    start: np.ndarray,
    tol: ToleranceProfile,
) -> _Stage:
    """Grow the working set of pairs until the restricted verdict holds for all kept pairs.

    A feasible restricted program is feasible for the full one as it stands.
    An infeasible one stands once every left-out pair is priced above the
    Farkas margin; otherwise the most negative pairs join the working set.
    """
    na, nb = space.resp_u.shape[1], space.resp_v.shape[1]
    used = np.zeros(space.mask.shape, dtype=bool)
    used.flat[start] = True
    flat = np.flatnonzero(used)
    pricing = None
    for rounds in range(1, MAX_ROUNDS + 1):
        cols = _columns(space, flat)
        program = build(cols)
        result = solve(program, tol)
        if result.status is not LPStatus.INFEASIBLE:
            return _Stage(result, program, cols, None, rounds)

        y, z = result.certificate.ray_eq, result.certificate.ray_ub
        scale = max(float(np.max(np.abs(y), initial=0.0)), float(np.max(np.abs(z), initial=0.0)))
        y, z = y / scale, z / scale
        margin = -float(program.b_eq @ y + program.b_ub @ z)
        prices = _Prices.from_ray(y, na, nb)
        worst, priced, ids, bounds = _price(space, prices, eps_a, eps_b, used, tol.certificate - margin)
        left = margin + min(0.0, worst)
        pricing = PricingBound(ok=left > tol.certificate, margin=left, pairs_priced=priced, worst=worst)
        if pricing.ok:
            logger.debug("Infeasibility covers all %d kept pairs after %d rounds", space.kept, rounds)
            return _Stage(result, program, cols, pricing, rounds)
        if ids.size == 0:
            break
        chosen = ids[np.argsort(bounds)[:COLUMN_BATCH]]
        used.flat[chosen] = True
        flat = np.flatnonzero(used)
        logger.debug("Round %d: %d pairs priced below the margin, working set now %d", rounds, ids.size, flat.size)

    logger.warning("Column generation stopped with %d of %d pairs in the working set", flat.size, space.kept)
    message = f"column generation did not settle within {MAX_ROUNDS} rounds"
    return _Stage(LPResult(LPStatus.UNDECIDED, message=message), program, cols, pricing, MAX_ROUNDS)


def _exact_model(
    cols: _Columns,
    x: np.ndarray,
    s: SettingsSet,
    gu: PolarizationGrid,
    gv: PolarizationGrid,
) -> SubensembleModel:
    """Turn a slack-0 LP point into a model whose subensembles obey Malus' law exactly."""
    k, na = cols.ma.shape
    nb = cols.mb.shape[1]
    p = x[:k]
    m = x[k:].reshape(k, na, nb)
    keep = p > WEIGHT_FLOOR
    p, m = p[keep], m[keep]
    ma = cols.ma[keep][:, :, None]
    mb = cols.mb[keep][:, None, :]
    q = np.clip(m / p[:, None, None], np.maximum(0.0, ma + mb - 1.0), np.minimum(ma, mb))
    cond = np.empty(q.shape + (2, 2))
    cond[..., 0, 0] = q
    cond[..., 0, 1] = ma - q
    cond[..., 1, 0] = mb - q
    cond[..., 1, 1] = 1.0 - ma - mb + q
    cond = np.clip(cond, 0.0, None)
    logger.debug("Model uses %d subensembles (dropped weight %.3g)", int(keep.sum()), float(x[:k][~keep].sum()))
    return SubensembleModel(
        settings=s, grid_u=gu, grid_v=gv, pairs=cols.pairs[keep],
        weights=p / p.sum(), conditionals=cond, slack=0.0,
    )


def _check_shapes(b: Optional[Behavior], f: Optional[BellFunctional], s: SettingsSet) -> None:
    expected = (s.n_alice, s.n_bob)
    if b is not None and b.table.shape[:2] != expected:
        raise ShapeError(f"behavior has {b.table.shape[:2]} settings, settings file has {expected}")
    if f is not None and f.shape != expected:
        raise ShapeError(f"functional has {f.shape} settings, settings file has {expected}")


def membership_lp(
    b: Behavior,
    s: SettingsSet,
    gu: PolarizationGrid,
    gv: PolarizationGrid,
    slack: Slack = "auto",
    prune: bool = True,
    tol: ToleranceProfile = DEFAULT,
) -> MembershipResult:
    """Decide whether ``b`` admits a crypto-nonlocal model.

    member: an exact model exists on the grids. refuted: no model exists even
    with every subensemble relaxed by at least the discretization bound, so
    no continuum model exists either. undecided: neither could be shown.
    """
    _check_shapes(b, None, s)
    gu, gv = certify_grid(gu), certify_grid(gv)
    auto = slack_bound(gu) + slack_bound(gv)
    if slack == "auto":
        target, relaxation = auto, Relaxation.ROUNDING
    else:
        target, relaxation = float(slack), Relaxation.BOX
        if target < 0.0:
            raise ParameterRangeError(f"slack must be non-negative, got {target}")

    resp_u = local_response(gu, s, "A")
    resp_v = local_response(gv, s, "B")
    na, nb = s.n_alice, s.n_bob
    zero_a, zero_b = np.zeros(na), np.zeros(nb)
    space = _space(b, resp_u, resp_v, zero_a, zero_b, prune)
    exact = _generate(space, lambda cols: _exact_program(cols, b, None), zero_a, zero_b,
                      space.spread(COLUMN_BATCH), tol)
    base = dict(auto_slack=auto, pairs_total=space.total)

    if exact.result.status is LPStatus.FEASIBLE:
        model = _exact_model(exact.columns, exact.result.certificate.primal, s, gu, gv)
        logger.info("Behavior is a member (%d subensembles)", len(model))
        return MembershipResult(MembershipStatus.MEMBER, 0.0, certificate=exact.result.certificate, model=model,
                                program=exact.program, pairs_kept=space.kept, pairs_used=exact.columns.size,
                                message="exact grid model found", **base)
    if target <= 0.0:
        message = "no grid model; slack 0 cannot refute"
        if exact.result.status is not LPStatus.INFEASIBLE:
            message = exact.result.message
        return MembershipResult(MembershipStatus.UNDECIDED, 0.0, certificate=exact.result.certificate,
                                program=exact.program, pairs_kept=space.kept, pairs_used=exact.columns.size,
                                pricing=exact.pricing, message=message, **base)

    if relaxation is Relaxation.ROUNDING:
        ea = effect_coefficients(s, "A")[1]
        eb = effect_coefficients(s, "B")[1]
        chord_a, chord_b = 2.0 * slack_bound(gu), 2.0 * slack_bound(gv)
        eps_a = np.linalg.norm(ea, axis=1) * chord_a
        eps_b = np.linalg.norm(eb, axis=1) * chord_b

        def build(cols: _Columns) -> LinearProgram:
            return _rounding_program(cols, b, ea, eb, chord_a, chord_b)
    else:
        eps_a, eps_b = np.full(na, target), np.full(nb, target)

        def build(cols: _Columns) -> LinearProgram:
            return _box_program(cols, b, eps_a, eps_b)

    relaxed = _space(b, resp_u, resp_v, eps_a, eps_b, prune)
    start = np.union1d(exact.columns.flat, relaxed.spread(COLUMN_BATCH))
    stage = _generate(relaxed, build, eps_a, eps_b, start, tol)
    result = stage.result
    common = dict(certificate=result.certificate, program=stage.program, pairs_kept=relaxed.kept,
                  pairs_used=stage.columns.size, relaxation=relaxation, pricing=stage.pricing, **base)

    if result.status is LPStatus.INFEASIBLE and target >= auto:
        logger.info("Behavior refuted at slack %.6g (bound %.6g, %s relaxation)", target, auto, relaxation.value)
        return MembershipResult(MembershipStatus.REFUTED, target, message="infeasible beyond the discretization bound",
                                **common)
    if result.status is LPStatus.INFEASIBLE:
        message = f"infeasible at slack {target:.6g}, below the bound {auto:.6g}"
    elif result.status is LPStatus.FEASIBLE:
        message = f"no exact grid model, but feasible at slack {target:.6g}"
    else:
        message = result.message
    logger.info("Membership undecided: %s", message)
    return MembershipResult(MembershipStatus.UNDECIDED, target, message=message, **common)


def maximize_bell(
    f: BellFunctional,
    s: SettingsSet,
    gu: PolarizationGrid,
    gv: PolarizationGrid,
    tol: ToleranceProfile = DEFAULT,
) -> BellOptimum:
    """Largest value of ``f`` over grid crypto-nonlocal models (an inner bound).

    The objective is linear in the pair weights, so the optimum is the best
    single pair. Every pair is valued in closed form, the program runs over
    the best of them and the rest are checked against its optimum.
    """
    _check_shapes(None, f, s)
    resp_u = local_response(gu, s, "A")
    resp_v = local_response(gv, s, "B")
    space = _PairSpace(resp_u=resp_u, resp_v=resp_v, mask=np.ones((len(gu), len(gv)), dtype=bool))
    zero_a, zero_b = np.zeros(s.n_alice), np.zeros(s.n_bob)

    values = np.empty(space.mask.shape)
    for rows, bound in _pair_bounds(space, _Prices.from_functional(f), zero_a, zero_b):
        values[rows] = -bound
    flat_values = values.ravel()
    if flat_values.size > COLUMN_BATCH:
        top = np.argpartition(-flat_values, COLUMN_BATCH - 1)[:COLUMN_BATCH]
    else:
        top = np.arange(flat_values.size)
    cols = _columns(space, np.sort(top))

    program = _exact_program(cols, None, f)
    result = solve(program, tol)
    if result.status is not LPStatus.OPTIMAL:
        logger.warning("Bell optimization ended %s: %s", result.status.value, result.message)
        return BellOptimum(result.status, certificate=result.certificate, message=result.message)

    rest = np.ones(flat_values.size, dtype=bool)
    rest[cols.flat] = False
    best_left = float(flat_values[rest].max()) if rest.any() else -math.inf
    margin = result.objective - best_left
    pricing = PricingBound(ok=margin >= -tol.duality_gap * max(1.0, abs(result.objective)), margin=margin,
                           pairs_priced=int(rest.sum()), worst=best_left)
    if not pricing.ok:
        logger.warning("A left-out pair beats the restricted optimum by %.3g", -margin)
        return BellOptimum(LPStatus.UNDECIDED, certificate=result.certificate, pricing=pricing,
                           message="left-out pair exceeds the restricted optimum")
    model = _exact_model(cols, result.certificate.primal, s, gu, gv)
    logger.info("%s maximum over %dx%d grid: %.10f", f.name, len(gu), len(gv), result.objective)
    return BellOptimum(LPStatus.OPTIMAL, result.objective, model, result.certificate, pricing, result.message)
