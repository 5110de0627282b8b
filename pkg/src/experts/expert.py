"""
Expertos: conjunto de tecnologías, valor U_i, elección de tecnología y puja veraz.

U_i = max_mu [ E_{rho~mu} P_0(rho) - C_i(mu) ]. Como la tecnología nula mu0 está
siempre disponible, U_i >= 0.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from core.errors import IndexOutOfRangeError, InvalidTechnologyError
from core.records import ExpertValue
from core.simplex import Posterior, Prior
from core.technology import Technology, null_technology, validate_technology
from curves.preference_curve import CurveLike, base_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Expert:
    expert_id: str
    technologies: Tuple[Technology, ...]


def make_expert(expert_id: str, technologies: Sequence[Technology], prior: Prior) -> Expert:
    """Valida cada tecnología contra el prior y añade mu0 al final si falta."""
    techs: List[Technology] = list(technologies)
    for index, mu in enumerate(techs):
        report = validate_technology(mu, prior)
        if not report.passed:
            raise InvalidTechnologyError(
                f"Tecnología {index} del experto {expert_id} no válida: " + "; ".join(report.violations),
                report.violations,
            )
    if not any(mu.is_null_for(prior) for mu in techs):
        techs.append(null_technology(prior))
    return Expert(expert_id, tuple(techs))


def technology_value(curve: CurveLike, mu: Technology) -> float:
    """sum(peso * P_0(posterior)) - coste, siempre con la curva base (beta = 0)."""
    base = base_of(curve)
    expected = 0.0
    for posterior, weight in mu.support:
        expected += weight * base.value(posterior)
    return expected - mu.cost


def expert_value(expert: Expert, curve: CurveLike) -> ExpertValue:
    """Máximo de technology_value; en caso de empate gana el menor índice."""
    best_index = 0
    best_value = technology_value(curve, expert.technologies[0])
    for index, mu in enumerate(expert.technologies[1:], start=1):
        value = technology_value(curve, mu)
        if value > best_value:
            best_index, best_value = index, value
    return ExpertValue(u=best_value, best=best_index)


def truthful_bid(expert: Expert, curve: CurveLike) -> float:
    return expert_value(expert, curve).u


def realize_posterior(expert: Expert, technology_index: int, rng: np.random.Generator) -> Posterior:
    """Sortea un punto del soporte de la tecnología con su peso."""
    if not 0 <= technology_index < len(expert.technologies):
        raise IndexOutOfRangeError(
            f"Índice de tecnología {technology_index} fuera de rango para {expert.expert_id} "
            f"({len(expert.technologies)} tecnologías)"
        )
    mu = expert.technologies[technology_index]
    if len(mu.support) == 1:
        return mu.support[0][0]
    weights = mu.weights
    choice = int(rng.choice(len(mu.support), p=weights / weights.sum()))
    return mu.support[choice][0]
