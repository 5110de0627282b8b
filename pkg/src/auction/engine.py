"""
Motor del mecanismo: pujas veraces, subasta, contrato al ganador y simulación.

Pasos de una ejecución:
  1. El principal revela P_0. Cada experto puja su valor U_i (puja veraz) o, si el
     escenario tiene límites de riesgo, su puja restringida beta'.
  2. Subasta de segundo precio con reserve: el ganador recibe el contrato de P_beta
     con beta = segunda puja más alta (o el reserve).
  3. El ganador elige su mejor tecnología bajo P_0 (con límites, la mejor de M(beta)),
     realiza rho ~ mu*, informa rho (el contrato no se puede rechazar) y se sortea el
     resultado del evento con rho.

El principal obtiene P_0(rho) - pago; su esperanza es beta, la segunda puja más alta.
"""

import itertools
import logging
import math
import os
import concurrent.futures
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from tqdm import tqdm

from auction.scenario import Scenario
from auction.second_price import NO_SALE, RESERVE_ID, AuctionOutcome, Bid, leading_bidders, no_sale, run_second_price, settle
from auction.streams import MechanismStreams
from contracts.contract import Contract, expected_payment, payment_vector
from core.simplex import Posterior
from curves.preference_curve import evaluate
from experts.expert import ExpertValue, expert_value, realize_posterior
from maxrisk.restricted import restricted_bid, restricted_value

load_dotenv()

logger = logging.getLogger(__name__)

CHUNK_SIZE = 10_000
PROFIT_TOLERANCE = 1e-12

RUN_COLUMNS = [
    "run", "winner", "contract_beta", "technology", "report_index",
    "outcome", "payment", "principal_utility", "expert_profit",
]


@dataclass(frozen=True)
class MechanismResult:
    outcome: AuctionOutcome
    technology: Optional[int] = None
    report: Optional[Posterior] = None
    event_outcome: Optional[int] = None
    payment: float = 0.0
    principal_utility_sample: float = 0.0
    expert_profit_sample: float = 0.0


@dataclass
class InHouseSummary:
    values: Dict[str, float]
    efficient_expert: Optional[str]
    predicted_principal_utility: float
    binding: str


@dataclass
class ParticipationReport:
    passed: bool
    expert_profits: Dict[str, float]
    principal_expected_utility: float


@dataclass
class DominanceReport:
    max_gain: float
    truthful_bid: float
    worst_profile: Tuple[float, ...] = ()
    worst_deviation: Optional[float] = None
    profiles_checked: int = 0
    mode: str = "exact"


class MechanismEngine:
    """Cachea valores y pujas de un escenario y ejecuta el mecanismo completo."""

    def __init__(self, scenario: Scenario, workers: int = None):
        self.scenario = scenario
        self.workers = workers or int(os.getenv("MONTE_CARLO_WORKERS", 4))
        self.show_progress = os.getenv("SHOW_PROGRESS_BAR", "False").lower() in ("true", "1", "yes")
        limits = scenario.risk_limits
        self.limits = None if limits is None or limits.unbounded else limits
        self.values: List[ExpertValue] = [expert_value(e, scenario.curve) for e in scenario.experts]
        if self.limits is None:
            amounts = [v.u for v in self.values]
        else:
            amounts = [restricted_bid(e, scenario.curve, self.limits).beta_prime for e in scenario.experts]
        self.bids: List[Bid] = [Bid(e.expert_id, a) for e, a in zip(scenario.experts, amounts)]

    def technology_for(self, expert_index: int, beta: float) -> int:
        """Tecnología que usa el experto con el contrato de P_beta: la mejor de M(beta) si hay límites."""
        if self.limits is None:
            return self.values[expert_index].best
        expert = self.scenario.experts[expert_index]
        chosen, _ = restricted_value(expert, self.scenario.curve, beta, self.limits)
        if chosen is None:
            logger.warning(f"[RIESGO] M({beta:.6g}) vacío para {expert.expert_id}: usa su mejor tecnología sin límites")
            return self.values[expert_index].best
        return chosen

    # ---------------- una ejecución ----------------

    def run(self, streams: MechanismStreams) -> MechanismResult:
        scenario = self.scenario
        outcome = run_second_price(self.bids, scenario.reserve, streams.ties)
        if not outcome.is_sale:
            return MechanismResult(outcome)

        winner = scenario.expert_index(outcome.winner)
        expert = scenario.experts[winner]
        technology = self.technology_for(winner, outcome.contract_beta)
        report = realize_posterior(expert, technology, streams.posterior)
        event = int(streams.outcome.choice(report.n, p=report.as_array()))

        contract = Contract.for_curve(scenario.curve, outcome.contract_beta)
        payment = payment_vector(contract, report).payments[event]
        principal = evaluate(scenario.curve, report) - payment
        profit = payment - expert.technologies[technology].cost
        return MechanismResult(outcome, technology, report, event, payment, principal, profit)

    # ---------------- simulación por lotes ----------------

    def _winner_tables(self, outcome: AuctionOutcome) -> Dict[str, np.ndarray]:
        scenario = self.scenario
        winner = scenario.expert_index(outcome.winner)
        expert = scenario.experts[winner]
        technology = self.technology_for(winner, outcome.contract_beta)
        mu = expert.technologies[technology]
        reports = np.array([p.probs for p in mu.posteriors], dtype=float)
        contract = Contract.for_curve(scenario.curve, outcome.contract_beta)
        return {
            "winner": winner,
            "technology": technology,
            "weights": mu.weights / mu.weights.sum(),
            "reports": reports,
            "cumulative": np.cumsum(reports, axis=1),
            "payments": contract.payment_matrix(reports),
            "base_values": scenario.curve.values(reports),
            "cost": mu.cost,
            "beta": outcome.contract_beta,
        }

    def _simulate_chunk(self, chunk_index: int, size: int) -> pd.DataFrame:
        streams = MechanismStreams.from_seed(self.scenario.seed, chunk_index)
        runs = chunk_index * CHUNK_SIZE + np.arange(size)
        leaders = leading_bidders(self.bids, self.scenario.reserve)
        if not leaders:
            return pd.DataFrame({
                "run": runs, "winner": NO_SALE, "contract_beta": np.nan, "technology": -1,
                "report_index": -1, "outcome": -1, "payment": 0.0,
                "principal_utility": 0.0, "expert_profit": 0.0,
            }, columns=RUN_COLUMNS)

        if len(leaders) > 1:
            picks = streams.ties.integers(len(leaders), size=size)
        else:
            picks = np.zeros(size, dtype=int)

        frames = []
        for position, leader in enumerate(leaders):
            mask = picks == position
            count = int(mask.sum())
            if count == 0:
                continue
            table = self._winner_tables(settle(self.bids, self.scenario.reserve, leader))
            report_index = streams.posterior.choice(len(table["weights"]), size=count, p=table["weights"])
            cumulative = table["cumulative"][report_index].copy()
            cumulative[:, -1] = np.inf
            draws = streams.outcome.random(count)
            event = np.argmax(draws[:, np.newaxis] < cumulative, axis=1)
            payment = table["payments"][report_index, event]
            frames.append(pd.DataFrame({
                "run": runs[mask],
                "winner": self.scenario.experts[table["winner"]].expert_id,
                "contract_beta": table["beta"],
                "technology": table["technology"],
                "report_index": report_index,
                "outcome": event,
                "payment": payment,
                "principal_utility": table["base_values"][report_index] - payment,
                "expert_profit": payment - table["cost"],
            }, columns=RUN_COLUMNS))
        return pd.concat(frames).sort_values("run", kind="stable").reset_index(drop=True)

    def simulate(self, samples: int) -> pd.DataFrame:
        """
        `samples` ejecuciones independientes en bloques de CHUNK_SIZE. Cada bloque usa
        sus propios flujos SeedSequence([semilla, bloque]), así que el resultado solo
        depende de (semilla, samples) y no del número de hilos. La fila i no coincide con
        run_mechanism(MechanismStreams.from_seed(semilla, i)): los flujos son por bloque,
        no por ejecución.
        """
        if samples < 1:
            raise ValueError(f"El número de muestras debe ser positivo, recibido {samples}")
        sizes = [min(CHUNK_SIZE, samples - start) for start in range(0, samples, CHUNK_SIZE)]
        logger.info(f"[MONTECARLO] {samples} ejecuciones en {len(sizes)} bloques ({self.workers} hilos)")
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = [executor.submit(self._simulate_chunk, index, size) for index, size in enumerate(sizes)]
            frames = [
                future.result()
                for future in tqdm(futures, desc="Monte Carlo", disable=not self.show_progress)
            ]
        return pd.concat(frames, ignore_index=True)

    # ---------------- beneficio esperado exacto ----------------

    def winning_profit(self, expert_index: int, beta: float) -> float:
        """Beneficio esperado exacto del experto si gana el contrato de P_beta (informa la verdad)."""
        expert = self.scenario.experts[expert_index]
        mu = expert.technologies[self.technology_for(expert_index, beta)]
        contract = Contract.for_curve(self.scenario.curve, beta)
        expected = math.fsum(
            weight * expected_payment(payment_vector(contract, posterior), posterior)
            for posterior, weight in mu.support
        )
        return expected - mu.cost

    def expected_profit(self, expert_index: int, own_bid: float, opponent_bids: Sequence[float]) -> float:
        """
        Beneficio esperado del experto `expert_index` pujando `own_bid` frente a pujas
        fijas del resto (en el orden de los demás expertos). Los empates en cabeza se
        reparten con probabilidad uniforme.
        """
        bids = self._profile_bids(expert_index, own_bid, opponent_bids)
        leaders = leading_bidders(bids, self.scenario.reserve)
        if expert_index not in leaders:
            return 0.0
        outcome = settle(bids, self.scenario.reserve, expert_index)
        return self.winning_profit(expert_index, outcome.contract_beta) / len(leaders)

    def _profile_bids(self, expert_index: int, own_bid: float, opponent_bids: Sequence[float]) -> List[Bid]:
        others = [e for i, e in enumerate(self.scenario.experts) if i != expert_index]
        if len(opponent_bids) != len(others):
            raise ValueError(f"Se esperaban {len(others)} pujas rivales, recibidas {len(opponent_bids)}")
        amounts = list(opponent_bids)
        amounts.insert(expert_index, own_bid)
        return [Bid(e.expert_id, float(a)) for e, a in zip(self.scenario.experts, amounts)]

    def simulated_profit(
        self, expert_index: int, own_bid: float, opponent_bids: Sequence[float],
        samples: int, rng: np.random.Generator,
    ) -> float:
        bids = self._profile_bids(expert_index, own_bid, opponent_bids)
        leaders = leading_bidders(bids, self.scenario.reserve)
        if expert_index not in leaders:
            return 0.0
        outcome = settle(bids, self.scenario.reserve, expert_index)
        wins = rng.integers(len(leaders), size=samples) == leaders.index(expert_index)
        count = int(wins.sum())
        if count == 0:
            return 0.0
        table = self._winner_tables(outcome)
        report_index = rng.choice(len(table["weights"]), size=count, p=table["weights"])
        cumulative = table["cumulative"][report_index].copy()
        cumulative[:, -1] = np.inf
        event = np.argmax(rng.random(count)[:, np.newaxis] < cumulative, axis=1)
        profits = table["payments"][report_index, event] - table["cost"]
        return math.fsum(profits) / samples

    # ---------------- propiedades ----------------

    def truthful_outcome(self) -> Tuple[AuctionOutcome, List[int]]:
        leaders = leading_bidders(self.bids, self.scenario.reserve)
        if not leaders:
            return no_sale(self.scenario.reserve), leaders
        return settle(self.bids, self.scenario.reserve, leaders[0]), leaders


def run_mechanism(scenario: Scenario, streams: MechanismStreams) -> MechanismResult:
    return MechanismEngine(scenario).run(streams)


def expected_profit(scenario: Scenario, expert_index: int, own_bid: float, opponent_bids: Sequence[float]) -> float:
    return MechanismEngine(scenario).expected_profit(expert_index, own_bid, opponent_bids)


def check_dominant_strategy(
    scenario: Scenario,
    expert_index: int,
    bid_grid: Sequence[float],
    samples: int = None,
    rng: np.random.Generator = None,
) -> DominanceReport:
    """
    Para cada perfil de pujas rivales tomado de la rejilla compara el beneficio de cada
    puja de la rejilla con el de la puja veraz (U_i, o beta' con límites de riesgo).
    Devuelve la mayor ganancia por desviarse. Por defecto usa esperanzas exactas; con
    `samples` las estima por simulación.
    """
    if len(bid_grid) == 0:
        raise ValueError("La rejilla de pujas está vacía")
    engine = MechanismEngine(scenario)
    truthful = engine.bids[expert_index].amount
    mode = "exact" if not samples else "montecarlo"
    if mode == "montecarlo" and rng is None:
        rng = MechanismStreams.from_seed(scenario.seed).ties

    def profit(own: float, profile: Tuple[float, ...]) -> float:
        if mode == "exact":
            return engine.expected_profit(expert_index, own, profile)
        return engine.simulated_profit(expert_index, own, profile, samples, rng)

    report = DominanceReport(max_gain=-math.inf, truthful_bid=truthful, mode=mode)
    for profile in itertools.product(bid_grid, repeat=len(scenario.experts) - 1):
        baseline = profit(truthful, profile)
        for deviation in bid_grid:
            gain = profit(deviation, profile) - baseline
            if gain > report.max_gain:
                report.max_gain = gain
                report.worst_profile = tuple(profile)
                report.worst_deviation = deviation
        report.profiles_checked += 1
    logger.info(f"[SUBASTA] Dominancia ({mode}): máxima ganancia por desviarse {report.max_gain:.3e}")
    return report


def in_house_summary(scenario: Scenario) -> InHouseSummary:
    """
    Reformulación "in-house": el principal obtiene lo mismo que si tuviera en casa al
    segundo mejor experto (o el reserve, si es el que fija el precio). Con límites de
    riesgo los valores son las pujas restringidas beta'.
    """
    engine = MechanismEngine(scenario)
    values = {bid.expert_id: bid.amount for bid in engine.bids}
    ordered = dict(sorted(values.items(), key=lambda item: -item[1]))
    outcome, leaders = engine.truthful_outcome()
    efficient = None
    if values:
        best = max(range(len(engine.bids)), key=lambda i: (engine.bids[i].amount, -i))
        efficient = engine.bids[best].expert_id
    if not outcome.is_sale:
        return InHouseSummary(ordered, efficient, 0.0, NO_SALE)
    binding = "reserve" if outcome.runner_up.expert_id == RESERVE_ID else outcome.runner_up.expert_id
    return InHouseSummary(ordered, efficient, outcome.contract_beta, binding)


def is_efficient(scenario: Scenario, outcome: AuctionOutcome) -> bool:
    """El contratado es un experto de U máximo (hasta el desempate aleatorio)."""
    if not outcome.is_sale:
        return False
    engine = MechanismEngine(scenario)
    best = max(v.u for v in engine.values)
    return engine.values[scenario.expert_index(outcome.winner)].u >= best - PROFIT_TOLERANCE


def participation_report(scenario: Scenario) -> ParticipationReport:
    """Beneficio esperado de cada experto veraz y utilidad esperada del principal; ninguno negativo."""
    engine = MechanismEngine(scenario)
    outcome, leaders = engine.truthful_outcome()
    profits = {}
    for index, expert in enumerate(scenario.experts):
        opponents = [bid.amount for i, bid in enumerate(engine.bids) if i != index]
        profits[expert.expert_id] = engine.expected_profit(index, engine.bids[index].amount, opponents)
    principal = outcome.contract_beta if outcome.is_sale else 0.0
    passed = all(p >= -PROFIT_TOLERANCE for p in profits.values()) and principal >= -PROFIT_TOLERANCE
    return ParticipationReport(passed, profits, principal)
