"""LP feasibility and optimization with checkable certificates.

HiGHS (dual revised simplex, through scipy) does the pivoting. Whatever it
reports is turned into a certificate and re-checked by
``verify_certificate`` with plain arithmetic; a verdict whose certificate
does not check out is downgraded to UNDECIDED rather than returned.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from src.config import DEFAULT, ToleranceProfile
from src.models.errors import ShapeError
from src.models.program import (
    CertificateCheck,
    FeasibilityCertificate,
    LinearProgram,
    LPResult,
    LPStatus,
)

logger = logging.getLogger(__name__)

_METHOD = "highs-ds"


def _options(tol: ToleranceProfile) -> dict:
    return {
        "maxiter": tol.max_pivots,
        "primal_feasibility_tolerance": max(1e-10, tol.feasibility * 0.1),
        "dual_feasibility_tolerance": max(1e-10, tol.feasibility * 0.1),
        "presolve": True,
    }


def _or_none(mat: sp.csr_array, rhs: np.ndarray):
    return (mat, rhs) if mat.shape[0] else (None, None)


def _run(c, a_ub, b_ub, a_eq, b_eq, tol: ToleranceProfile):
    a_ub, b_ub = _or_none(a_ub, b_ub)
    a_eq, b_eq = _or_none(a_eq, b_eq)
    return linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=(0, None), method=_METHOD, options=_options(tol),
    )


def _marginals(res, name: str, size: int) -> np.ndarray:
    block = getattr(res, name, None)
    values = getattr(block, "marginals", None) if block is not None else None
    if values is None or len(values) != size:
        return np.zeros(size)
    return np.asarray(values, dtype=float)


def solve(lp: LinearProgram, tol: ToleranceProfile = DEFAULT) -> LPResult:
    """Decide feasibility (no objective) or maximize lp.objective."""
    if lp.n_vars == 0:
        return _solve_empty(lp, tol)

    b_eq = lp.b_eq - lp.a_eq @ lp.lower
    b_ub = lp.b_ub - lp.a_ub @ lp.lower
    c = -lp.objective if lp.objective is not None else np.zeros(lp.n_vars)
    logger.debug("Solving LP: %d vars, %d equalities, %d inequalities", lp.n_vars, lp.n_eq, lp.n_ub)

    res = _run(c, lp.a_ub, b_ub, lp.a_eq, b_eq, tol)
    iterations = int(getattr(res, "nit", 0) or 0)

    if res.status == 0:
        primal = np.asarray(res.x, dtype=float) + lp.lower
        cert = FeasibilityCertificate(kind="feasible", primal=primal)
        objective = None
        status = LPStatus.FEASIBLE
        if lp.objective is not None:
            status = LPStatus.OPTIMAL
            objective = float(lp.objective @ primal)
            cert.dual_eq = _marginals(res, "eqlin", lp.n_eq)
            cert.dual_ub = _marginals(res, "ineqlin", lp.n_ub)
        return _checked(lp, LPResult(status, cert, objective, res.message, iterations), tol)

    if res.status == 2:
        return _checked(lp, _farkas(lp, b_eq, b_ub, tol, iterations), tol)

    if res.status == 3:
        return _checked(lp, _unbounded(lp, b_eq, b_ub, tol, iterations), tol)

    if res.status == 1:
        logger.warning("LP pivot limit (%d) reached; verdict undecided", tol.max_pivots)
        return LPResult(LPStatus.UNDECIDED, message=f"pivot limit {tol.max_pivots} reached", iterations=iterations)

    logger.warning("LP solver gave up: %s", res.message)
    return LPResult(LPStatus.UNDECIDED, message=str(res.message), iterations=iterations)


def _checked(lp: LinearProgram, result: LPResult, tol: ToleranceProfile) -> LPResult:
    if result.status is LPStatus.UNDECIDED:
        return result
    check = verify_certificate(lp, result.certificate, tol)
    if not check.ok:
        logger.warning("Certificate for %s failed verification (%s); downgrading to undecided",
                       result.status.value, check.details)
        return LPResult(LPStatus.UNDECIDED, result.certificate, None,
                        f"certificate rejected: {check.details}", result.iterations)
    return result


def _farkas(lp: LinearProgram, b_eq, b_ub, tol: ToleranceProfile, iterations: int) -> LPResult:
    """Phase-one program whose duals give the infeasibility ray.

    min 1.s+ + 1.s- + 1.t  s.t.  A x + s+ - s- = b,  G x - t <= h,  all >= 0.
    """
    n, me, mu = lp.n_vars, lp.n_eq, lp.n_ub
    eye_e = sp.identity(me, format="csr")
    eye_u = sp.identity(mu, format="csr")
    a_eq = sp.hstack([lp.a_eq, eye_e, -eye_e, sp.csr_array((me, mu))], format="csr")
    a_ub = sp.hstack([lp.a_ub, sp.csr_array((mu, 2 * me)), -eye_u], format="csr")
    c = np.concatenate([np.zeros(n), np.ones(2 * me + mu)])
    res = _run(c, a_ub, b_ub, a_eq, b_eq, tol)
    iterations += int(getattr(res, "nit", 0) or 0)
    if res.status != 0:
        return LPResult(LPStatus.UNDECIDED, message=f"phase one failed: {res.message}", iterations=iterations)
    if res.fun <= tol.feasibility:
        logger.warning("Solver reported infeasible but phase one reaches %.3g; undecided", res.fun)
        return LPResult(LPStatus.UNDECIDED, message="infeasibility not confirmed by phase one",
                        iterations=iterations)
    cert = FeasibilityCertificate(
        kind="infeasible",
        ray_eq=-_marginals(res, "eqlin", me),
        ray_ub=-_marginals(res, "ineqlin", mu),
        residual=float(res.fun),
    )
    return LPResult(LPStatus.INFEASIBLE, cert, None, "infeasible", iterations)


def _unbounded(lp: LinearProgram, b_eq, b_ub, tol: ToleranceProfile, iterations: int) -> LPResult:
    """Feasible point plus an improving recession direction."""
    point = _run(np.zeros(lp.n_vars), lp.a_ub, b_ub, lp.a_eq, b_eq, tol)
    if point.status != 0:
        return LPResult(LPStatus.UNDECIDED, message="unbounded but no feasible point found", iterations=iterations)
    # max c.d  s.t.  A d = 0, G d <= 0, c.d <= 1, d >= 0
    a_ub = sp.vstack([lp.a_ub, sp.csr_array(lp.objective.reshape(1, -1))], format="csr")
    b_ray = np.concatenate([np.zeros(lp.n_ub), [1.0]])
    ray = _run(-lp.objective, a_ub, b_ray, lp.a_eq, np.zeros(lp.n_eq), tol)
    if ray.status != 0 or -ray.fun <= tol.feasibility:
        return LPResult(LPStatus.UNDECIDED, message="unbounded but no improving ray found", iterations=iterations)
    cert = FeasibilityCertificate(
        kind="feasible",
        primal=np.asarray(point.x, dtype=float) + lp.lower,
        direction=np.asarray(ray.x, dtype=float),
    )
    return LPResult(LPStatus.UNBOUNDED, cert, None, "unbounded", iterations)


def _solve_empty(lp: LinearProgram, tol: ToleranceProfile) -> LPResult:
    """No variables: every row reads 0 = b or 0 <= h."""
    bad_eq = np.flatnonzero(np.abs(lp.b_eq) > tol.feasibility)
    bad_ub = np.flatnonzero(lp.b_ub < -tol.feasibility)
    if bad_eq.size or bad_ub.size:
        ray_eq = np.zeros(lp.n_eq)
        ray_ub = np.zeros(lp.n_ub)
        if bad_eq.size:
            i = bad_eq[0]
            ray_eq[i] = -np.sign(lp.b_eq[i])
        else:
            ray_ub[bad_ub[0]] = 1.0
        cert = FeasibilityCertificate(kind="infeasible", ray_eq=ray_eq, ray_ub=ray_ub)
        return _checked(lp, LPResult(LPStatus.INFEASIBLE, cert, None, "infeasible (no variables)"), tol)
    cert = FeasibilityCertificate(kind="feasible", primal=np.zeros(0))
    if lp.objective is not None:
        cert.dual_eq, cert.dual_ub = np.zeros(lp.n_eq), np.zeros(lp.n_ub)
        return _checked(lp, LPResult(LPStatus.OPTIMAL, cert, 0.0, "optimal (no variables)"), tol)
    return _checked(lp, LPResult(LPStatus.FEASIBLE, cert, None, "feasible (no variables)"), tol)


def verify_certificate(
    lp: LinearProgram,
    cert: Optional[FeasibilityCertificate],
    tol: ToleranceProfile = DEFAULT,
) -> CertificateCheck:
    """Re-check a certificate against the program from scratch."""
    if cert is None:
        return CertificateCheck(ok=False, margin=-np.inf, details={"reason": "no certificate"})
    if cert.kind == "feasible":
        return _verify_feasible(lp, cert, tol)
    if cert.kind == "infeasible":
        return _verify_infeasible(lp, cert, tol)
    return CertificateCheck(ok=False, margin=-np.inf, details={"reason": f"unknown kind {cert.kind!r}"})


def _violation(lp: LinearProgram, x: np.ndarray) -> float:
    parts = [0.0]
    if lp.n_eq:
        parts.append(float(np.max(np.abs(lp.a_eq @ x - lp.b_eq))))
    if lp.n_ub:
        parts.append(float(np.max(lp.a_ub @ x - lp.b_ub)))
    if lp.n_vars:
        parts.append(float(np.max(lp.lower - x)))
    return max(parts)


def _verify_feasible(lp: LinearProgram, cert: FeasibilityCertificate, tol: ToleranceProfile) -> CertificateCheck:
    x = cert.primal
    if x is None or x.shape != (lp.n_vars,):
        raise ShapeError(f"primal point must have {lp.n_vars} entries")
    violation = _violation(lp, x)
    details: dict = {"violation": violation}
    ok = violation <= tol.certificate
    margin = tol.certificate - violation

    if cert.dual_eq is not None and cert.dual_ub is not None and lp.objective is not None:
        nu, lam = cert.dual_eq, cert.dual_ub
        if nu.shape != (lp.n_eq,) or lam.shape != (lp.n_ub,):
            raise ShapeError("dual multipliers do not match the constraint counts")
        reduced = -lp.objective - lp.a_eq.T @ nu - lp.a_ub.T @ lam
        upper = -(reduced @ lp.lower + nu @ lp.b_eq + lam @ lp.b_ub)
        value = float(lp.objective @ x)
        scale = max(1.0, abs(value), float(np.max(np.abs(nu), initial=0.0)), float(np.max(np.abs(lam), initial=0.0)))
        dual_violation = max(float(np.max(-reduced, initial=0.0)), float(np.max(lam, initial=0.0))) / scale
        gap = (upper - value) / max(1.0, abs(value))
        details.update({"dualViolation": dual_violation, "gap": gap})
        ok = ok and dual_violation <= tol.certificate and abs(gap) <= tol.duality_gap

    if cert.direction is not None and lp.objective is not None:
        d = cert.direction
        ray_violation = max(
            float(np.max(np.abs(lp.a_eq @ d), initial=0.0)),
            float(np.max(lp.a_ub @ d, initial=0.0)),
            float(np.max(-d, initial=0.0)),
        )
        improvement = float(lp.objective @ d)
        details.update({"rayViolation": ray_violation, "improvement": improvement})
        ok = ok and ray_violation <= tol.certificate and improvement > tol.certificate

    details["reason"] = "ok" if ok else "constraints not satisfied within tolerance"
    return CertificateCheck(ok=ok, margin=margin, details=details)


def _verify_infeasible(lp: LinearProgram, cert: FeasibilityCertificate, tol: ToleranceProfile) -> CertificateCheck:
    y = cert.ray_eq if cert.ray_eq is not None else np.zeros(lp.n_eq)
    z = cert.ray_ub if cert.ray_ub is not None else np.zeros(lp.n_ub)
    if y.shape != (lp.n_eq,) or z.shape != (lp.n_ub,):
        raise ShapeError("Farkas ray does not match the constraint counts")
    scale = max(float(np.max(np.abs(y), initial=0.0)), float(np.max(np.abs(z), initial=0.0)))
    if scale == 0.0:
        return CertificateCheck(ok=False, margin=-np.inf, details={"reason": "zero ray"})
    y, z = y / scale, z / scale
    combo = lp.a_eq.T @ y + lp.a_ub.T @ z
    # For x >= lower: combo.x >= combo.lower whenever combo >= 0, while
    # y.(A x) + z.(G x) <= b.y + h.z; the gap below makes those incompatible.
    margin = float(combo @ lp.lower - (lp.b_eq @ y + lp.b_ub @ z))
    sign_violation = float(np.max(-z, initial=0.0))
    combo_violation = float(np.max(-combo, initial=0.0))
    ok = sign_violation <= tol.certificate and combo_violation <= tol.certificate and margin > tol.certificate
    details = {
        "signViolation": sign_violation,
        "combinationViolation": combo_violation,
        "margin": margin,
        "reason": "ok" if ok else "ray does not prove infeasibility",
    }
    return CertificateCheck(ok=ok, margin=margin, details=details)
