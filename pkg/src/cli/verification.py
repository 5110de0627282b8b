"""
Suites de verificación del subcomando `verify`.

Cada suite devuelve un SuiteResult con su peor violación; ninguna lanza por una
propiedad incumplida. Las suites que no aplican al escenario (unicidad con curvas
con pliegues, riesgo máximo con n > 2) se marcan como omitidas.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from auction.engine import MechanismEngine, check_dominant_strategy
from auction.scenario import Scenario
from contracts.audits import check_properness, verify_uniqueness
from contracts.contract import Contract, payment_vector
from core.simplex import grid_matrix, simplex_grid
from curves.convexity import check_convexity
from experts.expert import expert_value
from maxrisk.bounds import binary_report_bounds
from maxrisk.limits import RiskLimits
from maxrisk.restricted import min_beta_reserve
from oracle.brute_force import brute_force_best_report, brute_force_expert_value, brute_force_report_bounds

logger = logging.getLogger(__name__)

SUITES = ("convexity", "properness", "identity", "dominance", "uniqueness", "maxrisk", "oracle")
TOLERANCE = 1e-9
CONVEXITY_SAMPLES = 10_000
UNIQUENESS_DEVIATION = 0.01
BOUNDS_STEP = 1e-3
DEFAULT_PHI_E = 0.5

OK, FAILED, SKIPPED = "ok", "FALLO", "omitida"


@dataclass
class SuiteResult:
    name: str
    status: str
    worst: float = 0.0
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == FAILED


def _status(passed: bool) -> str:
    return OK if passed else FAILED


def contract_betas(scenario: Scenario) -> List[float]:
    """beta = 0 y el beta del contrato que resulta de las pujas veraces."""
    outcome, _ = MechanismEngine(scenario).truthful_outcome()
    betas = [0.0]
    if outcome.is_sale and outcome.contract_beta > 0.0:
        betas.append(outcome.contract_beta)
    return betas


def dominance_grid(scenario: Scenario) -> List[float]:
    values = sorted(bid.amount for bid in MechanismEngine(scenario).bids)
    grid = {0.0, scenario.reserve, values[-1] + 0.1}
    grid.update(values)
    grid.update(0.5 * (a + b) for a, b in zip(values, values[1:]))
    return sorted(grid)


def suite_convexity(scenario: Scenario, step: float) -> SuiteResult:
    report = check_convexity(scenario.curve, CONVEXITY_SAMPLES, seed=scenario.seed)
    return SuiteResult("convexity", _status(report.passed), report.worst_violation,
                       f"{report.violations} de {report.samples} ternas violan la convexidad")


def suite_properness(scenario: Scenario, step: float) -> SuiteResult:
    worst, details, passed = -math.inf, [], True
    for beta in contract_betas(scenario):
        report = check_properness(Contract.for_curve(scenario.curve, beta), step)
        passed = passed and report.passed
        worst = max(worst, report.worst_violation)
        if report.witness_belief is not None:
            details.append(f"beta={beta:g}: creencia {report.witness_belief} gana informando {report.witness_report}")
    return SuiteResult("properness", _status(passed), worst, "; ".join(details) or "informar la verdad es óptimo")


def suite_identity(scenario: Scenario, step: float) -> SuiteResult:
    """<informe, pagos(informe)> = P_beta(informe) y pagos lineales en beta."""
    grid = grid_matrix(simplex_grid(scenario.outcomes, step))
    base_payments = Contract.for_curve(scenario.curve, 0.0).payment_matrix(grid)
    worst = 0.0
    for beta in contract_betas(scenario):
        contract = Contract.for_curve(scenario.curve, beta)
        payments = contract.payment_matrix(grid)
        gap = np.abs(np.einsum("ij,ij->i", grid, payments) - contract.curve.values(grid))
        linear = np.abs(payments - (base_payments - beta))
        worst = max(worst, float(gap.max()), float(linear.max()))
    return SuiteResult("identity", _status(worst <= TOLERANCE), worst, f"{len(grid)} informes")


def suite_dominance(scenario: Scenario, step: float) -> SuiteResult:
    grid = dominance_grid(scenario)
    worst = -math.inf
    for index in range(len(scenario.experts)):
        worst = max(worst, check_dominant_strategy(scenario, index, grid).max_gain)
    return SuiteResult("dominance", _status(worst <= TOLERANCE), worst,
                       f"rejilla de {len(grid)} pujas, esperanzas exactas")


def suite_uniqueness(scenario: Scenario, step: float) -> SuiteResult:
    if not scenario.curve.smooth:
        return SuiteResult("uniqueness", SKIPPED, detail="curva con pliegues: el hiperplano de apoyo no es único")
    n = scenario.outcomes
    contract = Contract.for_curve(scenario.curve, 0.0)
    report = simplex_grid(n, step)[1]
    tangent = payment_vector(contract, report).as_array()
    # e_1 - rho_1 * (1, ..., 1) es ortogonal al informe: no cambia el pago esperado en él
    direction = np.full(n, -report.probs[0])
    direction[0] += 1.0
    direction *= UNIQUENESS_DEVIATION / np.max(np.abs(direction))

    same = verify_uniqueness(contract, report, tangent, step)
    other = verify_uniqueness(contract, report, tangent + direction, step)
    passed = same.equals_tangent and other.counterexample_found
    return SuiteResult("uniqueness", _status(passed), -other.gain,
                       f"informe {report}: contraejemplo en {other.witness_belief} (ganancia {other.gain:.3e})")


def suite_maxrisk(scenario: Scenario, step: float) -> SuiteResult:
    if scenario.outcomes != 2:
        return SuiteResult("maxrisk", SKIPPED, detail="solo binario (n = 2)")
    limits = scenario.risk_limits or RiskLimits(phi_e=DEFAULT_PHI_E)
    worst = 0.0
    for beta in contract_betas(scenario):
        exact = binary_report_bounds(scenario.curve, beta, limits)
        scan = brute_force_report_bounds(scenario.curve, beta, limits, BOUNDS_STEP)
        if exact.is_empty != scan.is_empty:
            worst = math.inf
            continue
        if not exact.is_empty:
            worst = max(worst, abs(exact.rho_min - scan.rho_min), abs(exact.rho_max - scan.rho_max))
    detail = f"cotas exactas frente a rejilla {BOUNDS_STEP:g}"
    passed = worst <= BOUNDS_STEP + TOLERANCE

    if math.isfinite(limits.phi_p):
        reserve = max(scenario.reserve, min_beta_reserve(scenario.curve, limits.phi_p))
        grid = grid_matrix(simplex_grid(2, step))
        payments = Contract.for_curve(scenario.curve, reserve).payment_matrix(grid)
        excess = float(payments.max()) - limits.phi_p
        passed = passed and excess <= TOLERANCE
        detail += f"; con reserve {reserve:g} el pago máximo excede phi_p en {excess:.3e}"
    return SuiteResult("maxrisk", _status(passed), worst, detail)


def suite_oracle(scenario: Scenario, step: float) -> SuiteResult:
    mismatches = [
        e.expert_id for e in scenario.experts
        if brute_force_expert_value(e, scenario.curve) != expert_value(e, scenario.curve)
    ]
    points = simplex_grid(scenario.outcomes, step)
    worst = 0.0
    for belief in points:
        report, _ = brute_force_best_report(scenario.curve, belief, step)
        worst = max(worst, float(np.max(np.abs(report.as_array() - belief.as_array()))))
    passed = not mismatches and worst <= step / 2.0
    detail = f"{len(points)} creencias; valores de expertos " + (
        "coinciden" if not mismatches else f"difieren en {', '.join(mismatches)}"
    )
    return SuiteResult("oracle", _status(passed), worst, detail)


SUITE_RUNNERS: Dict[str, Callable[[Scenario, float], SuiteResult]] = {
    "convexity": suite_convexity,
    "properness": suite_properness,
    "identity": suite_identity,
    "dominance": suite_dominance,
    "uniqueness": suite_uniqueness,
    "maxrisk": suite_maxrisk,
    "oracle": suite_oracle,
}


def run_verification(scenario: Scenario, suites: Sequence[str], step: float) -> List[SuiteResult]:
    results = []
    for name in suites:
        logger.info(f"[VERIFICACION] Ejecutando suite {name}")
        result = SUITE_RUNNERS[name](scenario, step)
        if result.failed:
            logger.warning(f"[VERIFICACION] Suite {name} fallida: {result.detail}")
        results.append(result)
    return results
