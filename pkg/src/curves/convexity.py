"""
Auditoría estadística de convexidad de una curva de preferencia.

Se sortean ternas (rho', rho'', t) con rho', rho'' uniformes en el símplice
(Dirichlet(1,...,1)) y t uniforme en [0,1], y se comprueba
    t P(rho') + (1-t) P(rho'') >= P(t rho' + (1-t) rho'') - 1e-9.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from core.errors import MechanismError
from curves.preference_curve import CurveLike, as_shifted

logger = logging.getLogger(__name__)

CONVEXITY_TOLERANCE = 1e-9


@dataclass
class ConvexityWitness:
    rho_a: List[float]
    rho_b: List[float]
    t: float


@dataclass
class ConvexityReport:
    passed: bool
    samples: int
    worst_violation: float
    witness: Optional[ConvexityWitness] = None
    violations: int = 0


def check_convexity(curve: CurveLike, samples: int, seed: int = 0) -> ConvexityReport:
    """
    Devuelve el peor exceso P(mezcla) - mezcla de valores. Un valor <= 1e-9 es
    compatible con convexidad; no lanza aunque la curva no sea convexa.
    """
    if samples < 1:
        raise MechanismError(f"Se necesita al menos una muestra, recibidas {samples}")
    shifted = as_shifted(curve)
    rng = np.random.default_rng(seed)
    alpha = np.ones(shifted.n)
    rho_a = rng.dirichlet(alpha, size=samples)
    rho_b = rng.dirichlet(alpha, size=samples)
    t = rng.uniform(0.0, 1.0, size=samples)

    mixed = t[:, np.newaxis] * rho_a + (1.0 - t)[:, np.newaxis] * rho_b
    chord = t * shifted.values(rho_a) + (1.0 - t) * shifted.values(rho_b)
    excess = shifted.values(mixed) - chord

    worst = int(np.argmax(excess))
    worst_violation = float(excess[worst])
    failures = int(np.count_nonzero(excess > CONVEXITY_TOLERANCE))
    report = ConvexityReport(
        passed=failures == 0,
        samples=samples,
        worst_violation=worst_violation,
        violations=failures,
    )
    if worst_violation > 0.0:
        report.witness = ConvexityWitness(rho_a[worst].tolist(), rho_b[worst].tolist(), float(t[worst]))
    if not report.passed:
        logger.warning(f"[CONVEXIDAD] {failures} ternas violan la convexidad (peor {worst_violation:.3e})")
    return report
