"""
Subcomandos de la CLI. Cada función recibe el escenario ya cargado y los argumentos
de argparse, imprime un informe legible y devuelve el código de salida.
"""

import logging
import math
import os
from typing import List, Optional

import numpy as np
import pandas as pd

from auction.engine import MechanismEngine, in_house_summary, participation_report, run_mechanism
from auction.scenario import Scenario
from auction.second_price import NO_SALE
from auction.statistics import CONFIDENCE, mean_with_interval
from auction.streams import MechanismStreams
from cli.csv_writer import write_csv
from cli.verification import SUITES, contract_betas, run_verification
from contracts.contract import Contract, expected_payment, payment_vector
from core.errors import MechanismError, UnsupportedForNError
from core.simplex import Posterior, grid_parts, make_posterior
from maxrisk.bounds import allowed_report_table, binary_report_bounds, bounds_sweep
from maxrisk.limits import RiskLimits, contract_exposure, restricted_technologies
from maxrisk.restricted import bid_grid, min_beta_reserve, restricted_bid

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_PLOT_STEP = 0.01
DEFAULT_PLOT_BETAS = "0,0.1,0.2"


def parse_floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise MechanismError(f"Lista de números no válida: '{text}'") from exc


def parse_report(text: str, n: int) -> Posterior:
    """'0.9' (solo binario) o '0.9,0.1'."""
    values = parse_floats(text)
    if len(values) == 1 and n == 2:
        values = [values[0], 1.0 - values[0]]
    return make_posterior(values)


def _limits(scenario: Scenario) -> RiskLimits:
    return scenario.risk_limits or RiskLimits()


def _fmt_limit(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:g}"


def _print_header(title: str, scenario: Scenario):
    print(f"\n=== {title}: {scenario.name or 'escenario'} (n={scenario.outcomes}, semilla {scenario.seed}) ===")


def cmd_auction(scenario: Scenario, args) -> int:
    _print_header("SUBASTA", scenario)
    summary = in_house_summary(scenario)
    print("Pujas veraces (U_i, o beta' con límites de riesgo):")
    for expert_id, value in summary.values.items():
        print(f"  {expert_id:<12} puja = {value:.6f}")

    result = run_mechanism(scenario, MechanismStreams.from_seed(scenario.seed, 0))
    if not result.outcome.is_sale:
        print(f"Resultado: {NO_SALE} (reserve {scenario.reserve:g})")
    else:
        print(f"Ganador: {result.outcome.winner}  contrato beta = {result.outcome.contract_beta:.6f}"
              f"  (fija el precio: {summary.binding})")
        print(f"Ejecución 0: informe {result.report}, resultado {result.event_outcome + 1}, "
              f"pago {result.payment:.6f}")

    participation = participation_report(scenario)
    for expert_id, profit in participation.expert_profits.items():
        print(f"  beneficio esperado de {expert_id}: {profit:.6f}")

    engine = MechanismEngine(scenario)
    runs = engine.simulate(scenario.samples)
    mean, half_width = mean_with_interval(runs["principal_utility"])
    print(f"Utilidad del principal: prevista {summary.predicted_principal_utility:.6f}, "
          f"empírica {mean:.6f} ± {half_width:.6f} (IC {CONFIDENCE:.0%}, {scenario.samples} muestras)")

    if args.out:
        write_csv(runs, args.out, "auction")
        print(f"Registros por ejecución en {args.out}")
    return EXIT_OK


def cmd_verify(scenario: Scenario, args) -> int:
    _print_header("VERIFICACIÓN", scenario)
    suites = args.suite or list(SUITES)
    step = args.grid_step or float(os.getenv("VERIFY_GRID_STEP", 0.05))
    grid_parts(step)
    results = run_verification(scenario, suites, step)
    for result in results:
        print(f"  -> [{result.status.upper():<7}] {result.name:<11} peor {result.worst:.3e}  {result.detail}")
    failed = [r.name for r in results if r.failed]
    if failed:
        print(f"Suites fallidas: {', '.join(failed)}")
        return EXIT_FAILED
    print("Todas las suites pasan.")
    return EXIT_OK


def _require_binary(scenario: Scenario, what: str):
    if scenario.outcomes != 2:
        raise UnsupportedForNError(f"'{what}' es un barrido escalar: requiere n = 2 (n = {scenario.outcomes})")


def plot_frame(scenario: Scenario, what: str, step: float, betas: List[float],
               report: Optional[Posterior], beta: float) -> pd.DataFrame:
    _require_binary(scenario, what)
    k = grid_parts(step)
    rho = np.arange(k + 1) / k
    points = np.column_stack([rho, 1.0 - rho])
    base_values = scenario.curve.values(points)

    if what == "curves":
        frame = pd.DataFrame({"rho": rho})
        for b in betas:
            frame[f"P_{b:g}"] = base_values - b
        return frame
    if what == "maxrisk":
        table = allowed_report_table(scenario.curve, beta, _limits(scenario), step)
        return table[["rho", "payment_outcome1", "payment_outcome2", "allowed"]]
    if what == "payments":
        pv = payment_vector(Contract.for_curve(scenario.curve, beta), report)
        return pd.DataFrame({
            "rho": rho,
            "tangent": points @ pv.as_array(),
            "curve": base_values - beta,
        })
    raise MechanismError(f"Tipo de gráfico desconocido: {what}")


def cmd_plot(scenario: Scenario, args) -> int:
    if not args.out:
        print("[ERROR] plot necesita --out")
        return EXIT_USAGE
    report = parse_report(args.report or "0.9", scenario.outcomes) if args.what == "payments" else None
    frame = plot_frame(
        scenario,
        args.what,
        args.grid_step or DEFAULT_PLOT_STEP,
        parse_floats(args.betas or DEFAULT_PLOT_BETAS),
        report,
        args.beta or 0.0,
    )
    write_csv(frame, args.out, f"plot-{args.what}")
    print(f"{len(frame)} filas ({args.what}) escritas en {args.out}")
    return EXIT_OK


def cmd_maxrisk(scenario: Scenario, args) -> int:
    _print_header("RIESGO MÁXIMO", scenario)
    limits = _limits(scenario)
    print(f"Límites: phi_p = {_fmt_limit(limits.phi_p)}, phi_e = {_fmt_limit(limits.phi_e)}")
    betas = parse_floats(args.betas) if args.betas else contract_betas(scenario)

    if scenario.outcomes == 2:
        for b in betas:
            print(f"  beta = {b:g}: informes admisibles {binary_report_bounds(scenario.curve, b, limits)}")
    else:
        for b in betas:
            for expert in scenario.experts:
                allowed = restricted_technologies(expert, scenario.curve, b, limits)
                print(f"  beta = {b:g}: M(beta) de {expert.expert_id} = {allowed}")

    grid = bid_grid(scenario.experts, scenario.curve)
    for expert in scenario.experts:
        bid = restricted_bid(expert, scenario.curve, limits, grid,
                             literal_argmax=args.literal_argmax, refine=args.refine)
        print(f"  Puja restringida de {expert.expert_id}: beta' = {bid.beta_prime:.6g} "
              f"(tecnología {bid.technology}, valor {bid.restricted_value:.6g})")

    if math.isfinite(limits.phi_p):
        print(f"Reserve mínimo por cota de vértices: {min_beta_reserve(scenario.curve, limits.phi_p):.6g}")

    if args.out:
        _require_binary(scenario, "maxrisk")
        write_csv(bounds_sweep(scenario.curve, grid, limits), args.out, "maxrisk-sweep")
        print(f"Barrido (beta, rho_min, rho_max) en {args.out}")
    return EXIT_OK


def cmd_contract(scenario: Scenario, args) -> int:
    _print_header("CONTRATO", scenario)
    if not args.report:
        print("[ERROR] contract necesita --report")
        return EXIT_USAGE
    report = parse_report(args.report, scenario.outcomes)
    beta = args.beta or 0.0
    pv = payment_vector(Contract.for_curve(scenario.curve, beta), report)
    exposure = contract_exposure(pv)
    print(f"Informe {report}, beta = {beta:g}")
    for i, payment in enumerate(pv.payments, start=1):
        print(f"  pago si ocurre el resultado {i}: {payment:.10g}")
    print(f"Pago esperado con creencia veraz: {expected_payment(pv, report):.10g}")
    print(f"Pago máximo del principal: {exposure.principal_max_payment:.6g}; "
          f"pérdida máxima del experto: {exposure.expert_max_loss:.6g}")
    return EXIT_OK


COMMANDS = {
    "auction": cmd_auction,
    "verify": cmd_verify,
    "plot": cmd_plot,
    "maxrisk": cmd_maxrisk,
    "contract": cmd_contract,
}
