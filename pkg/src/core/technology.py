"""
Tecnologías de investigación: distribuciones finitas sobre posteriores.

Una tecnología mu es un conjunto finito de pares (posterior, peso) con un coste
C(mu). Debe preservar la media: sum(peso * posterior) = rho0. La tecnología nula
mu0 (masa puntual en rho0, coste 0) siempre está disponible para el experto.
"""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from core.simplex import Posterior, Prior, make_posterior

WEIGHT_TOLERANCE = 1e-9
MEAN_TOLERANCE = 1e-7


@dataclass(frozen=True)
class Technology:
    support: Tuple[Tuple[Posterior, float], ...]
    cost: float = 0.0
    name: str = ""

    @property
    def posteriors(self) -> List[Posterior]:
        return [posterior for posterior, _ in self.support]

    @property
    def weights(self) -> np.ndarray:
        return np.array([weight for _, weight in self.support], dtype=float)

    def is_null_for(self, prior: Prior) -> bool:
        """True si es mu0: masa puntual en el prior con coste cero."""
        return (
            len(self.support) == 1
            and self.support[0][0].probs == prior.probs
            and self.cost == 0.0
        )


def null_technology(prior: Prior) -> Technology:
    """mu0: no investigar, sin coste."""
    return Technology(support=((prior.value, 1.0),), cost=0.0, name="mu0")


def make_technology(support: List[Tuple[Posterior, float]], cost: float = 0.0, name: str = "") -> Technology:
    return Technology(support=tuple((p, float(w)) for p, w in support), cost=float(cost), name=name)


def technology_mean(mu: Technology) -> Posterior:
    """Media sum(peso * posterior) de la tecnología."""
    n = mu.support[0][0].n
    mean = [math.fsum(weight * posterior.probs[i] for posterior, weight in mu.support) for i in range(n)]
    return make_posterior(mean)


@dataclass
class ValidationReport:
    passed: bool = True
    violations: List[str] = field(default_factory=list)

    def fail(self, message: str):
        self.passed = False
        self.violations.append(message)


def validate_technology(mu: Technology, prior: Prior) -> ValidationReport:
    """
    Comprueba los invariantes de una tecnología frente al prior del escenario.
    Nunca lanza: devuelve un informe con cada invariante violado.
    """
    report = ValidationReport()

    if not mu.support:
        report.fail("soporte vacío")
        return report

    if not math.isfinite(mu.cost) or mu.cost < 0.0:
        report.fail(f"coste no válido: {mu.cost}")

    weights = [weight for _, weight in mu.support]
    if any((not math.isfinite(w)) or w < 0.0 for w in weights):
        report.fail("hay pesos negativos o no finitos")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        report.fail(f"los pesos suman {total!r}, no 1")

    dims = {posterior.n for posterior, _ in mu.support}
    if dims != {prior.n}:
        report.fail(f"dimensión de los posteriores {sorted(dims)} distinta de n={prior.n}")
        return report

    seen = set()
    for posterior, _ in mu.support:
        if posterior.probs in seen:
            report.fail(f"posterior repetido en el soporte: {posterior}")
        seen.add(posterior.probs)

    mean = [math.fsum(w * posterior.probs[i] for posterior, w in mu.support) for i in range(prior.n)]
    gap = max(abs(m - p) for m, p in zip(mean, prior.probs))
    if gap > MEAN_TOLERANCE:
        pretty = ", ".join(f"{m:.6g}" for m in mean)
        report.fail(f"no preserva la media: media ({pretty}) frente al prior {prior.value}")

    return report
