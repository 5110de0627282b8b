"""
Puja restringida por riesgo máximo y reserve mínimo por la cota de vértices.

Con límites de riesgo el experto solo puede usar las tecnologías de M(beta). Su puja
es el mayor beta de la rejilla con el que todavía no pierde dinero:
    max_{mu en M(beta)} [ sum(peso * P_beta(rho)) - coste ] >= 0.
La variante `literal_argmax` devuelve en cambio el beta que maximiza ese valor
restringido (que con mu0 admisible es siempre 0) para poder compararlas.
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from core.errors import EmptyFeasibleSetError, MechanismError
from curves.preference_curve import CurveLike, base_of, vertex_values
from experts.expert import Expert, technology_value, truthful_bid
from maxrisk.limits import RiskLimits, restricted_technologies

load_dotenv()

logger = logging.getLogger(__name__)

BREAK_EVEN_TOLERANCE = 1e-12
REFINE_ITERATIONS = 40


@dataclass(frozen=True)
class RestrictedBid:
    beta_prime: float
    technology: int
    restricted_value: float = 0.0


def _beta_step(step: float = None) -> float:
    return step or float(os.getenv("MAXRISK_BETA_STEP", 0.005))


def beta_grid(upper: float, step: float = None) -> List[float]:
    """Rejilla ascendente 0, step, 2 step, ... hasta cubrir `upper` (MAXRISK_BETA_STEP por defecto)."""
    step = _beta_step(step)
    if step <= 0.0 or not math.isfinite(upper) or upper < 0.0:
        raise MechanismError(f"Rejilla de beta no válida: paso {step}, máximo {upper}")
    count = int(math.ceil(upper / step - 1e-9))
    return [round(i * step, 12) for i in range(count + 1)]


def bid_grid(experts: Sequence[Expert], curve: CurveLike, step: float = None) -> List[float]:
    """
    Rejilla de beta para las pujas restringidas de `experts`. El valor restringido nunca
    supera U_i - beta, así que basta llegar un paso por encima del mayor U_i.
    """
    step = _beta_step(step)
    upper = max([0.0] + [truthful_bid(expert, curve) for expert in experts])
    return beta_grid(upper + step, step)


def restricted_value(expert: Expert, curve: CurveLike, beta: float, limits: RiskLimits) -> Tuple[Optional[int], float]:
    """Mejor tecnología de M(beta) y su valor esperado con P_beta (None, -inf si M(beta) vacío)."""
    best_index, best_value = None, -math.inf
    for index in restricted_technologies(expert, curve, beta, limits):
        value = technology_value(curve, expert.technologies[index]) - beta
        if value > best_value:
            best_index, best_value = index, value
    return best_index, best_value


def _refine(expert: Expert, curve: CurveLike, limits: RiskLimits, lo: float, hi: float) -> Tuple[float, int, float]:
    index, value = restricted_value(expert, curve, lo, limits)
    for _ in range(REFINE_ITERATIONS):
        mid = 0.5 * (lo + hi)
        mid_index, mid_value = restricted_value(expert, curve, mid, limits)
        if mid_index is not None and mid_value >= -BREAK_EVEN_TOLERANCE:
            lo, index, value = mid, mid_index, mid_value
        else:
            hi = mid
    return lo, index, value


def restricted_bid(
    expert: Expert,
    curve: CurveLike,
    limits: RiskLimits,
    betas: Sequence[float] = None,
    literal_argmax: bool = False,
    refine: bool = False,
) -> RestrictedBid:
    base = base_of(curve)
    if betas is None:
        betas = bid_grid([expert], base)
    if len(betas) == 0:
        raise MechanismError("La rejilla de beta está vacía")
    if list(betas) != sorted(betas) or betas[0] != 0.0:
        raise MechanismError("La rejilla de beta debe ser ascendente y empezar en 0")

    evaluations = [(beta, *restricted_value(expert, base, beta, limits)) for beta in betas]
    if evaluations[0][1] is None:
        raise EmptyFeasibleSetError(f"Ninguna tecnología de {expert.expert_id} cumple los límites con beta = 0")

    if literal_argmax:
        beta, index, value = max(
            (e for e in evaluations if e[1] is not None), key=lambda e: e[2]
        )
        return RestrictedBid(beta, index, value)

    feasible = [i for i, (_, index, value) in enumerate(evaluations)
                if index is not None and value >= -BREAK_EVEN_TOLERANCE]
    if not feasible:
        raise EmptyFeasibleSetError(f"{expert.expert_id} pierde dinero con toda tecnología admisible")
    position = feasible[-1]
    beta, index, value = evaluations[position]
    if refine and position + 1 < len(evaluations):
        beta, index, value = _refine(expert, base, limits, beta, evaluations[position + 1][0])
    logger.info(f"[RIESGO] Puja restringida de {expert.expert_id}: beta' = {beta:.6g} (tecnología {index})")
    return RestrictedBid(beta, index, value)


def min_beta_reserve(curve: CurveLike, phi_p: float) -> float:
    """
    Menor beta' con P_beta'(rho_hat_i) <= phi_p en todos los vértices. Como el hiperplano
    de apoyo nunca queda por encima de la curva convexa, con ese reserve ningún pago
    supera phi_p.
    """
    if math.isinf(phi_p):
        return 0.0
    return max(0.0, max(vertex_values(base_of(curve))) - phi_p)
