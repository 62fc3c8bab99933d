"""Human-readable summaries printed to standard output (in Spanish)."""
from __future__ import annotations

from src.engine.axioms import AxiomReport, WeakModel
from src.engine.crypto_nonlocal import BellOptimum, MembershipResult, MembershipStatus
from src.engine.separability import SeparabilityVerdict
from src.models.behavior import NoSignallingReport

_MEMBERSHIP = {
    MembershipStatus.MEMBER: "MIEMBRO: existe un modelo cripto-no-local exacto en la malla",
    MembershipStatus.REFUTED: "REFUTADO: ningún modelo cripto-no-local reproduce el comportamiento",
    MembershipStatus.UNDECIDED: "INDECISO: la malla no permite decidir",
}

_SEPARABILITY = {
    "separable": "SEPARABLE",
    "entangled": "ENTRELAZADO",
    "boundary": "FRONTERA (separable dentro de la tolerancia)",
}


def rule(title: str) -> str:
    return f"== {title} =="


def no_signalling_line(report: NoSignallingReport) -> str:
    state = "sí" if report.ok else "NO"
    return f"No señalización: {state} (violación máxima {report.max_violation:.3e})"


def membership_summary(label: str, result: MembershipResult) -> list[str]:
    lines = [
        rule(label),
        _MEMBERSHIP[result.status],
        f"Pares en la malla: {result.pairs_kept} de {result.pairs_total} tras la poda, {result.pairs_used} en el programa",
        f"Holgura usada: {result.slack:.6g} (cota de discretización {result.auto_slack:.6g}, "
        f"relajación {result.relaxation.value})",
    ]
    if result.pricing is not None:
        state = "cubre" if result.pricing.ok else "NO cubre"
        lines.append(f"El certificado {state} los {result.pricing.pairs_priced} pares fuera del programa")
    if result.message:
        lines.append(f"Detalle: {result.message}")
    return lines


def bell_summary(name: str, optimum: BellOptimum) -> list[str]:
    if optimum.value is None:
        return [rule(name), f"Optimización sin resultado ({optimum.status.value}): {optimum.message}"]
    return [
        rule(name),
        f"Valor máximo sobre modelos cripto-no-locales en la malla: {optimum.value:.10f}",
        f"Subensambles usados: {len(optimum.model)}",
    ]


def separability_summary(verdict: SeparabilityVerdict) -> list[str]:
    lines = [
        _SEPARABILITY[verdict.label],
        f"Autovalor mínimo de la transpuesta parcial: {verdict.min_partial_transpose_eigenvalue:.12g}",
    ]
    if verdict.witness_value is not None:
        lines.append(f"Testigo de entrelazamiento: tr(W rho) = {verdict.witness_value:.12g}")
    return lines


def axiom_summary(report: AxiomReport) -> list[str]:
    form = "sí" if report.product_form else "NO"
    return [
        f"Forma producto: {form}",
        f"Desviación máxima respecto al producto de Malus: {report.max_deviation:.3e}",
        f"Desviación máxima de pureza: {report.max_purity_deviation:.3e}",
    ]


def weak_model_summary(model: WeakModel, reproduction_error: float, threshold: float) -> list[str]:
    lines = [
        f"Términos espectrales: Alice {len(model.alice_terms)}, Bob {len(model.bob_terms)}",
        f"Error de reproducción del comportamiento: {reproduction_error:.3e}",
        f"Desviación de Malus en el lado de Bob: {model.bob_malus_gap:.6f}",
        f"Señalización en subensambles: {model.signalling:.6f}",
    ]
    if model.bob_malus_gap > threshold:
        lines.append("AVISO: los subensambles violan la ley de Malus en el lado de Bob")
    return lines
