"""Command-line front end.

One subcommand per analysis. Inputs are JSON files or ``preset:NAME``;
a human summary goes to standard output, logs to standard error and the
machine report to ``--report``.

Exit codes: 0 success, 2 input error, 3 negative verdict (refuted,
entangled, axioms not in product form), 4 undecided.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from src.config import (
    DEFAULT_MEMBERSHIP_GRID,
    DEFAULT_OPTIMIZATION_GRID,
    DEFAULT_PROBES,
    DEFAULT_SEED,
    PROFILES,
    TOOL_VERSION,
    ToleranceProfile,
    default_threads,
    get_profile,
)
from src.engine.axioms import enforce_axioms, weak_model
from src.engine.behavior import bell_value, check_no_signalling, quantum_behavior
from src.engine.crypto_nonlocal import MembershipResult, MembershipStatus, maximize_bell, membership_lp
from src.engine.generators import random_axiom_model
from src.engine.grid import build_grid, slack_bound
from src.engine.lp import verify_certificate
from src.engine.separability import ppt_check
from src.engine.tomography import tomographic_reconstruct
from src.engine.validator import ModelValidator
from src.io.export import CSVExporter, LPWriter
from src.io.file_manager import PRESET_PREFIX, FileManager
from src.models.behavior import BellFunctional, SettingsSet
from src.models.errors import InputError, ModelInconsistentError, PolarsepError, PremiseViolation
from src.models.grid import PolarizationGrid
from src.models.polarization import DensityMatrix
from src.models.program import LPStatus
from src.ui import console
from src.ui.report import RunReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NEGATIVE = 3
EXIT_UNDECIDED = 4

BOB_MALUS_THRESHOLD = 1e-9

_MEMBERSHIP_EXIT = {
    MembershipStatus.MEMBER: EXIT_OK,
    MembershipStatus.REFUTED: EXIT_NEGATIVE,
    MembershipStatus.UNDECIDED: EXIT_UNDECIDED,
}


def _emit(lines: list[str]) -> None:
    print("\n".join(lines))


def _stem(path: str) -> str:
    if path.startswith(PRESET_PREFIX):
        return path[len(PRESET_PREFIX):]
    return Path(path).stem


def _slack(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}")
    if value < 0.0:
        raise argparse.ArgumentTypeError("slack must be non-negative")
    return value


def _grids(args: argparse.Namespace, report: RunReport) -> tuple[PolarizationGrid, PolarizationGrid]:
    """Alice's and Bob's grids from --grid-file or --grid / --grid-v."""
    if args.grid_file:
        grid = FileManager.load_grid(args.grid_file)
        report.add_input("grid", args.grid_file)
        return grid, grid
    with report.stage("grid"):
        gu = build_grid(args.grid, probes=args.probes, seed=args.seed)
        gv = gu if args.grid_v in (None, args.grid) else build_grid(args.grid_v, probes=args.probes, seed=args.seed)
    return gu, gv


def _grid_info(gu: PolarizationGrid, gv: PolarizationGrid) -> dict:
    return {
        "alice": {"points": len(gu), "coveringAngle": gu.covering_angle, "slackBound": slack_bound(gu)},
        "bob": {"points": len(gv), "coveringAngle": gv.covering_angle, "slackBound": slack_bound(gv)},
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen_behavior(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    rho = FileManager.load_state(args.state)
    s = FileManager.load_settings(args.settings)
    report.add_input("state", args.state)
    report.add_input("settings", args.settings)

    with report.stage("behavior"):
        b = quantum_behavior(rho, s)
    ns = check_no_signalling(b, tol.no_signalling)
    data = {"behavior": b.to_dict(), "noSignalling": ns.to_dict()}
    lines = [console.rule("Comportamiento"), console.no_signalling_line(ns)]
    if (b.n_alice, b.n_bob) == (2, 2):
        data["chsh"] = bell_value(b, BellFunctional.chsh())
        lines.append(f"Valor CHSH: {data['chsh']:.10f}")

    FileManager.save_json(data, args.out)
    if args.csv:
        CSVExporter.export(b, args.csv)
    report.verdicts = {"output": args.out, "noSignalling": ns.to_dict(), "chsh": data.get("chsh")}
    _emit(lines)
    return EXIT_OK


def _membership_job(job: tuple) -> MembershipResult:
    b, s, gu, gv, slack, prune, tol = job
    return membership_lp(b, s, gu, gv, slack=slack, prune=prune, tol=tol)


def _write_artifacts(args: argparse.Namespace, stem: str, result: MembershipResult, check: Optional[dict]) -> dict:
    files = {}
    if args.certificates:
        path = str(Path(args.certificates) / f"{stem}.certificate.json")
        FileManager.save_json({
            "status": result.status.value,
            "slack": result.slack,
            "certificate": result.certificate.to_dict() if result.certificate else None,
            "check": check,
        }, path)
        files["certificate"] = path
        if result.model is not None:
            path = str(Path(args.certificates) / f"{stem}.model.json")
            FileManager.save_json(result.model.to_dict(), path)
            files["model"] = path
    if args.lp_dump and result.program is not None:
        path = str(Path(args.lp_dump) / f"{stem}.lp")
        Path(args.lp_dump).mkdir(parents=True, exist_ok=True)
        LPWriter.export(result.program, path, name=f"{stem} slack={result.slack:.6g}")
        files["program"] = path
    return files


def cmd_leggett(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    s = FileManager.load_settings(args.settings)
    behaviors = [FileManager.load_behavior(path) for path in args.behaviors]
    report.add_input("settings", args.settings)
    for i, path in enumerate(args.behaviors):
        report.add_input(f"behavior[{i}]" if len(args.behaviors) > 1 else "behavior", path)
    gu, gv = _grids(args, report)

    jobs = [(b, s, gu, gv, args.slack, not args.no_prune, tol) for b in behaviors]
    workers = min(args.threads, len(jobs))
    with report.stage("membership"):
        if workers > 1:
            logger.info("Solving %d instances on %d workers", len(jobs), workers)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_membership_job, jobs))
        else:
            results = [_membership_job(job) for job in jobs]

    verdicts = []
    codes = []
    validator = ModelValidator()
    for i, (path, b, result) in enumerate(zip(args.behaviors, behaviors, results)):
        stem = _stem(path) if len(results) == 1 else f"{i}_{_stem(path)}"
        entry = result.to_dict()
        entry.pop("certificate")
        entry["behavior"] = path
        check = None
        if result.certificate is not None and result.program is not None:
            check = verify_certificate(result.program, result.certificate, tol).to_dict()
            entry["certificateCheck"] = check
        if result.model is not None:
            entry["validation"] = validator.validate(result.model, b).to_dict()
        entry["files"] = _write_artifacts(args, stem, result, check)
        verdicts.append(entry)
        codes.append(_MEMBERSHIP_EXIT[result.status])
        _emit(console.membership_summary(path, result))

    report.verdicts = {"grids": _grid_info(gu, gv), "instances": verdicts}
    if EXIT_UNDECIDED in codes:
        return EXIT_UNDECIDED
    return EXIT_NEGATIVE if EXIT_NEGATIVE in codes else EXIT_OK


def cmd_axiom_check(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    m = FileManager.load_axiom_model(args.model)
    report.add_input("model", args.model)
    try:
        with report.stage("axioms"):
            result = enforce_axioms(m, tol)
    except (PremiseViolation, ModelInconsistentError) as exc:
        report.verdicts = {
            "productForm": False,
            "error": type(exc).__name__,
            "message": str(exc),
            "context": getattr(exc, "context", {}),
        }
        _emit([console.rule("Axiomas"), f"El modelo no cumple las premisas: {exc}"])
        return EXIT_NEGATIVE

    if args.out:
        FileManager.save_json(result.reconstructed.to_dict(), args.out)
    report.verdicts = result.to_dict()
    _emit([console.rule("Axiomas")] + console.axiom_summary(result))
    return EXIT_OK if result.product_form else EXIT_NEGATIVE


def cmd_weak_model(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    rho = FileManager.load_state(args.state, allow_witness=args.allow_witness)
    s = FileManager.load_settings(args.settings)
    report.add_input("state", args.state)
    report.add_input("settings", args.settings)

    with report.stage("weak-model"):
        model = weak_model(rho, s, allow_witness=args.allow_witness)
    error = None if rho.witness else model.average().max_abs_diff(quantum_behavior(rho, s))

    data = model.to_dict()
    data["reproductionError"] = error
    FileManager.save_json(data, args.out)
    report.verdicts = {
        "output": args.out,
        "reproductionError": error,
        "bobMalusGap": model.bob_malus_gap,
        "subensembleSignalling": model.signalling,
        "bobMalusViolated": model.bob_malus_gap > BOB_MALUS_THRESHOLD,
    }
    _emit([console.rule("Modelo débil")]
          + console.weak_model_summary(model, error if error is not None else float("nan"), BOB_MALUS_THRESHOLD))
    return EXIT_OK


def cmd_ppt(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    rho = FileManager.load_state(args.state)
    report.add_input("state", args.state)
    verdict = ppt_check(rho)
    if args.witness and verdict.witness is not None:
        FileManager.save_json(DensityMatrix(verdict.witness, witness=True).to_dict(), args.witness)
    report.verdicts = verdict.to_dict()
    _emit([console.rule("Separabilidad")] + console.separability_summary(verdict))
    return EXIT_NEGATIVE if verdict.label == "entangled" else EXIT_OK


def cmd_chsh(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    b = FileManager.load_behavior(args.behavior)
    f = FileManager.load_functional(args.functional)
    report.add_input("behavior", args.behavior)
    report.add_input("functional", args.functional)
    value = bell_value(b, f)
    ns = check_no_signalling(b, tol.no_signalling)
    report.verdicts = {"functional": f.name, "value": value, "noSignalling": ns.to_dict()}
    _emit([console.rule(f"Funcional {f.name}"), f"Valor: {value:.10f}", console.no_signalling_line(ns)])
    return EXIT_OK


def cmd_tomography(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    stats = FileManager.load_stats(args.stats)
    report.add_input("stats", args.stats)
    rho = tomographic_reconstruct(stats)
    FileManager.save_json(rho.to_dict(), args.out)
    purity = float(np.real(np.trace(rho.data @ rho.data)))
    report.verdicts = {"output": args.out, "records": len(stats), "purity": purity}
    _emit([console.rule("Tomografía"), f"Registros: {len(stats)}", f"Pureza tr(rho^2): {purity:.10f}",
           f"Estado guardado en {args.out}"])
    return EXIT_OK


def cmd_maximize(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    f = FileManager.load_functional(args.functional)
    s = FileManager.load_settings(args.settings)
    report.add_input("functional", args.functional)
    report.add_input("settings", args.settings)
    gu, gv = _grids(args, report)

    with report.stage("maximize"):
        optimum = maximize_bell(f, s, gu, gv, tol)
    if args.model and optimum.model is not None:
        FileManager.save_json(optimum.model.to_dict(), args.model)
    report.verdicts = {"grids": _grid_info(gu, gv), **optimum.to_dict()}
    _emit(console.bell_summary(f.name, optimum))
    return EXIT_OK if optimum.status is LPStatus.OPTIMAL else EXIT_UNDECIDED


def cmd_grid(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    with report.stage("grid"):
        grid = build_grid(args.points, probes=args.probes, seed=args.seed)
    FileManager.save_json(grid.to_dict(), args.out)
    report.verdicts = {"output": args.out, "points": len(grid), "coveringAngle": grid.covering_angle,
                       "slackBound": slack_bound(grid)}
    _emit([console.rule("Malla"), f"Puntos: {len(grid)}",
           f"Ángulo de recubrimiento: {grid.covering_angle:.10f} rad"])
    return EXIT_OK


def cmd_gen_model(args: argparse.Namespace, report: RunReport, tol: ToleranceProfile) -> int:
    s: SettingsSet = FileManager.load_settings(args.settings)
    report.add_input("settings", args.settings)
    gu, gv = _grids(args, report)
    rng = np.random.default_rng(args.seed)
    model = random_axiom_model(rng, s, gu, gv, n_pairs=args.pairs, parts=args.parts)
    FileManager.save_json(model.to_dict(), args.out)
    report.verdicts = {"output": args.out, "pairs": args.pairs, "parts": args.parts}
    _emit([console.rule("Modelo generado"), f"Subensambles: {args.pairs}", f"Guardado en {args.out}"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_grid_options(p: argparse.ArgumentParser, default: int) -> None:
    p.add_argument("--grid", type=int, default=default, help=f"grid points per party (default {default})")
    p.add_argument("--grid-v", type=int, default=None, help="Bob's grid points (default: same as --grid)")
    p.add_argument("--grid-file", default=None, help="use a grid file for both parties")
    p.add_argument("--probes", type=int, default=DEFAULT_PROBES, help="random probes for the covering check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarsep",
        description="Polarization models, crypto-nonlocal membership and two-photon separability.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (recorded in reports)")
    parser.add_argument("--tol-profile", choices=sorted(PROFILES), default="default")
    parser.add_argument("--threads", type=int, default=default_threads(),
                        help="worker processes for batch runs (env POLARSEP_THREADS)")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--timings", action="store_true", help="include per-stage timings in the report")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", default=None, help="write the machine-readable run report here")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-behavior", parents=[common], help="behavior of a state under settings")
    p.add_argument("state")
    p.add_argument("settings")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--csv", default=None, help="also export the table as CSV")
    p.set_defaults(handler=cmd_gen_behavior)

    p = sub.add_parser("leggett", parents=[common], help="crypto-nonlocal membership of behaviors")
    p.add_argument("behaviors", nargs="+")
    p.add_argument("-s", "--settings", required=True)
    _add_grid_options(p, DEFAULT_MEMBERSHIP_GRID)
    p.add_argument("--slack", type=_slack, default="auto", help="'auto' or a non-negative Malus slack")
    p.add_argument("--no-prune", action="store_true", help="keep every grid pair")
    p.add_argument("--certificates", default=None, help="directory for certificate and model files")
    p.add_argument("--lp-dump", default=None, help="directory for LP text dumps")
    p.set_defaults(handler=cmd_leggett)

    p = sub.add_parser("axiom-check", parents=[common], help="purity forcing on an axiom model")
    p.add_argument("model")
    p.add_argument("-o", "--out", default=None, help="write the product-form model")
    p.set_defaults(handler=cmd_axiom_check)

    p = sub.add_parser("weak-model", parents=[common], help="model with Malus' law on Alice's side only")
    p.add_argument("state")
    p.add_argument("settings")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--allow-witness", action="store_true")
    p.set_defaults(handler=cmd_weak_model)

    p = sub.add_parser("ppt", parents=[common], help="two-photon separability")
    p.add_argument("state")
    p.add_argument("--witness", default=None, help="write the entanglement witness here")
    p.set_defaults(handler=cmd_ppt)

    p = sub.add_parser("chsh", parents=[common], help="Bell functional value of a behavior")
    p.add_argument("behavior")
    p.add_argument("functional", nargs="?", default="preset:chsh")
    p.set_defaults(handler=cmd_chsh)

    p = sub.add_parser("tomography", parents=[common], help="reconstruct a photon state")
    p.add_argument("stats")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(handler=cmd_tomography)

    p = sub.add_parser("maximize", parents=[common], help="Bell functional maximum over grid models")
    p.add_argument("functional")
    p.add_argument("settings")
    _add_grid_options(p, DEFAULT_OPTIMIZATION_GRID)
    p.add_argument("--model", default=None, help="write the optimal model here")
    p.set_defaults(handler=cmd_maximize)

    p = sub.add_parser("grid", parents=[common], help="write a polarization grid")
    p.add_argument("points", type=int)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--probes", type=int, default=DEFAULT_PROBES)
    p.set_defaults(handler=cmd_grid)

    p = sub.add_parser("gen-model", parents=[common], help="random axiom-compliant model")
    p.add_argument("settings")
    _add_grid_options(p, 16)
    p.add_argument("--pairs", type=int, default=4)
    p.add_argument("--parts", type=int, default=4, help="pure states per post-selected ensemble")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(handler=cmd_gen_model)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    tol = get_profile(args.tol_profile)
    report = RunReport(command=args.command, seed=args.seed, tolerance_profile=tol.name,
                       include_timings=args.timings)
    try:
        code = args.handler(args, report, tol)
    except InputError as exc:
        print(f"Error de entrada: {exc}", file=sys.stderr)
        report.verdicts = {"error": str(exc)}
        code = EXIT_INPUT
    except PolarsepError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        report.verdicts = {"error": f"{type(exc).__name__}: {exc}"}
        code = EXIT_INPUT
    report.exit_code = code
    if args.report:
        report.save(args.report)
    return code
