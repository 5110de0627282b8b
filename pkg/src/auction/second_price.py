"""
Subasta de segundo precio con precio de reserva.

El precio de reserva actúa como una puja virtual del principal. Si gana la puja
virtual no hay venta (NoSale). Un reserve estrictamente positivo gana los empates;
un reserve 0 no se adelanta a una puja 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from core.errors import MechanismError

logger = logging.getLogger(__name__)

RESERVE_ID = "__reserve__"
NO_SALE = "NoSale"


@dataclass(frozen=True)
class Bid:
    expert_id: str
    amount: float

    def __post_init__(self):
        if not math.isfinite(self.amount):
            raise MechanismError(f"La puja de {self.expert_id} no es finita: {self.amount}")


@dataclass(frozen=True)
class AuctionOutcome:
    winner: Optional[str]
    contract_beta: Optional[float]
    runner_up: Optional[Bid]
    reserve: float = 0.0

    @property
    def is_sale(self) -> bool:
        return self.winner is not None

    def describe(self) -> str:
        if not self.is_sale:
            return NO_SALE
        return f"{self.winner} (beta = {self.contract_beta:.6g})"


def _check_reserve(reserve: float) -> float:
    reserve = float(reserve)
    if not math.isfinite(reserve):
        raise MechanismError(f"Precio de reserva no finito: {reserve}")
    return reserve


def leading_bidders(bids: Sequence[Bid], reserve: float) -> List[int]:
    """Índices de las pujas más altas que superan el reserve (vacío si NoSale)."""
    reserve = _check_reserve(reserve)
    if not bids:
        return []
    top = max(bid.amount for bid in bids)
    clears = top > reserve if reserve > 0.0 else top >= reserve
    if not clears:
        return []
    return [i for i, bid in enumerate(bids) if bid.amount == top]


def settle(bids: Sequence[Bid], reserve: float, winner_index: int) -> AuctionOutcome:
    """Resultado con ganador fijado: el precio es el máximo del resto de pujas y el reserve."""
    reserve = _check_reserve(reserve)
    runner_up = Bid(RESERVE_ID, reserve)
    for i, bid in enumerate(bids):
        if i == winner_index or bid.amount < runner_up.amount:
            continue
        # una puja real igual al reserve fija el precio; entre pujas reales, la primera
        if bid.amount > runner_up.amount or runner_up.expert_id == RESERVE_ID:
            runner_up = bid
    return AuctionOutcome(bids[winner_index].expert_id, runner_up.amount, runner_up, reserve)


def no_sale(reserve: float) -> AuctionOutcome:
    reserve = _check_reserve(reserve)
    return AuctionOutcome(None, None, Bid(RESERVE_ID, reserve), reserve)


def run_second_price(bids: Sequence[Bid], reserve: float, rng: np.random.Generator) -> AuctionOutcome:
    """
    Gana la puja más alta que supera el reserve y recibe el contrato desplazado por la
    segunda más alta de (pujas + reserve). Los empates en cabeza se rompen de forma
    uniforme con `rng`, que solo se consume si hay empate.
    """
    leaders = leading_bidders(bids, reserve)
    if not leaders:
        logger.debug(f"[SUBASTA] Ninguna puja supera el reserve {reserve:g}: NoSale")
        return no_sale(reserve)
    if len(leaders) > 1:
        winner_index = leaders[int(rng.integers(len(leaders)))]
    else:
        winner_index = leaders[0]
    outcome = settle(bids, reserve, winner_index)
    logger.debug(f"[SUBASTA] Gana {outcome.winner}; precio {outcome.contract_beta:g}")
    return outcome
