"""
Oráculos de fuerza bruta.

Reimplementaciones independientes de las operaciones principales: solo usan los tipos
de core y la evaluación de la curva. Los gradientes salen de diferencias
finitas centrales y los pagos se recalculan a partir de ellos, sin pasar por el módulo
de contratos. Las curvas se evalúan en todo el espacio ambiente, así que en el borde del
símplice también se usan diferencias centrales: en una arista entre dos acciones el
cociente da la media de sus pendientes, que sigue siendo un subgradiente.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from core.errors import BoundaryPointError, NotBinaryError
from core.records import ExpertValue, ReportInterval, RiskLimits
from core.simplex import Posterior, grid_matrix, grid_parts, simplex_grid

logger = logging.getLogger(__name__)

DEFAULT_H = 1e-5
ORACLE_TOLERANCE = 1e-9

PaymentRule = Callable[[Posterior], Sequence[float]]


def _vector(rho) -> np.ndarray:
    if isinstance(rho, Posterior):
        return rho.as_array()
    return np.asarray(rho, dtype=float)


def _fd_gradients(values: Callable[[np.ndarray], np.ndarray], points: np.ndarray, h: float) -> np.ndarray:
    grads = np.empty_like(points)
    for i in range(points.shape[1]):
        shift = np.zeros(points.shape[1])
        shift[i] = h
        grads[:, i] = (values(points + shift) - values(points - shift)) / (2.0 * h)
    return grads


def _fd_payments(values: Callable[[np.ndarray], np.ndarray], reports: np.ndarray, h: float = DEFAULT_H) -> np.ndarray:
    grads = _fd_gradients(values, reports, h)
    level = values(reports) - np.sum(grads * reports, axis=1)
    return level[:, np.newaxis] + grads


def finite_difference_gradient(curve, rho, h: float = DEFAULT_H) -> np.ndarray:
    """Diferencias centrales en cada coordenada ambiente. rho debe tener todas sus coordenadas >= h."""
    x = _vector(rho)
    if np.any(x < h):
        raise BoundaryPointError(f"Punto {x.tolist()} a menos de h={h} del borde del ortante")
    return _fd_gradients(curve.values, x[np.newaxis, :], h)[0]


def brute_force_best_report(
    curve, belief: Posterior, step: float, payment_rule: Optional[PaymentRule] = None
) -> Tuple[Posterior, float]:
    """
    Recorre todos los informes de la rejilla y devuelve el de mayor pago esperado para
    `belief`. Entre informes empatados (1e-9) se queda con el más cercano a la creencia.
    """
    points = simplex_grid(belief.n, step)
    reports = grid_matrix(points)
    if payment_rule is None:
        payments = _fd_payments(curve.values, reports)
    else:
        payments = np.array([list(payment_rule(p)) for p in points], dtype=float)

    target = belief.as_array()
    expected = payments @ target
    best = float(expected.max())
    candidates = np.flatnonzero(expected >= best - ORACLE_TOLERANCE)
    distance = np.max(np.abs(reports[candidates] - target), axis=1)
    chosen = int(candidates[int(np.argmin(distance))])
    return points[chosen], float(expected[chosen])


def brute_force_expert_value(expert, curve) -> ExpertValue:
    """Enumeración directa de todas las tecnologías con la curva sin desplazar."""
    best_value, best_index = -math.inf, -1
    for index, mu in enumerate(expert.technologies):
        total = 0.0
        for posterior, weight in mu.support:
            total += weight * float(curve.values(posterior.as_array()[np.newaxis, :])[0])
        total -= mu.cost
        if total > best_value:
            best_value, best_index = total, index
    return ExpertValue(u=best_value, best=best_index)


def brute_force_report_bounds(curve, beta: float, limits: RiskLimits, step: float) -> ReportInterval:
    """Envolvente de los informes escalares de la rejilla cuyos pagos respetan los límites."""
    if curve.n != 2:
        raise NotBinaryError(f"Las cotas de informe solo existen para n = 2 (n = {curve.n})")

    def shifted(points: np.ndarray) -> np.ndarray:
        return curve.values(points) - beta

    k = grid_parts(step)
    rho = np.arange(k + 1) / k
    payments = _fd_payments(shifted, np.column_stack([rho, 1.0 - rho]))
    allowed = np.all(payments <= limits.phi_p + ORACLE_TOLERANCE, axis=1) & np.all(
        payments >= -limits.phi_e - ORACLE_TOLERANCE, axis=1
    )
    if not allowed.any():
        return ReportInterval(None, None)
    inside = rho[allowed]
    logger.debug(f"[ORACULO] {int(allowed.sum())} de {k + 1} informes admisibles")
    return ReportInterval(float(inside.min()), float(inside.max()))
