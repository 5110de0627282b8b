"""
Límites de riesgo máximo: phi_p (pago máximo del principal) y phi_e (pérdida
máxima del experto). Un informe es admisible si todos los pagos de su contrato
caen en [-phi_e, phi_p].
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from core.records import RiskLimits
from core.simplex import Posterior
from contracts.contract import Contract, PaymentVector
from curves.preference_curve import CurveLike
from experts.expert import Expert

logger = logging.getLogger(__name__)

# Holgura en unidades monetarias para aceptar informes frontera con 5 decimales
LIMIT_TOLERANCE = 1e-5


@dataclass(frozen=True)
class ContractExposure:
    principal_max_payment: float
    expert_max_loss: float

    def within(self, limits: RiskLimits, tolerance: float = LIMIT_TOLERANCE) -> bool:
        return (
            self.principal_max_payment <= limits.phi_p + tolerance
            and self.expert_max_loss <= limits.phi_e + tolerance
        )


def contract_exposure(pv: PaymentVector) -> ContractExposure:
    """Lo máximo que puede pagar el principal y perder el experto con este vector de pagos."""
    payments = pv.as_array()
    return ContractExposure(
        principal_max_payment=max(0.0, float(payments.max())),
        expert_max_loss=max(0.0, float(-payments.min())),
    )


def payments_allowed(payments: np.ndarray, limits: RiskLimits, tolerance: float = LIMIT_TOLERANCE) -> np.ndarray:
    """Máscara por fila: todos los pagos en [-phi_e, phi_p] con holgura `tolerance`."""
    payments = np.atleast_2d(payments)
    upper = np.all(payments <= limits.phi_p + tolerance, axis=1)
    lower = np.all(payments >= -limits.phi_e - tolerance, axis=1)
    return upper & lower


def is_report_allowed(curve: CurveLike, report: Posterior, limits: RiskLimits) -> bool:
    payments = Contract.for_curve(curve).payments_for(report)
    return bool(payments_allowed(payments, limits)[0])


def restricted_technologies(expert: Expert, curve: CurveLike, beta: float, limits: RiskLimits) -> List[int]:
    """M(beta): tecnologías cuyo soporte (puntos con peso > 0) es todo admisible con P_beta."""
    contract = Contract.for_curve(curve, beta)
    allowed = []
    for index, mu in enumerate(expert.technologies):
        support = [posterior for posterior, weight in mu.support if weight > 0.0]
        reports = np.array([p.probs for p in support], dtype=float)
        if np.all(payments_allowed(contract.payment_matrix(reports), limits)):
            allowed.append(index)
    return allowed
