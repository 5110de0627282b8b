"""
Contrato veraz asociado a una curva de preferencia P_beta.

Dado un informe rho*, el experto cobra si ocurre el resultado i
    pago_i = P_beta(rho*) - <grad P_beta(rho*), rho*> + dP_beta/drho_i (rho*),
es decir, el valor en el vértice rho_hat_i del hiperplano tangente a la curva en rho*.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from core.errors import DimensionMismatchError
from core.simplex import Posterior
from curves.preference_curve import CurveLike, ShiftedCurve, as_shifted, shift

logger = logging.getLogger(__name__)

OVERRIDE_MATCH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PaymentVector:
    payments: Tuple[float, ...]
    report: Posterior

    def as_array(self) -> np.ndarray:
        return np.asarray(self.payments, dtype=float)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{p:.6g}" for p in self.payments) + ")"


@dataclass(frozen=True)
class Contract:
    """Contrato correspondiente a P_beta. Los pagos son función pura de (curva, informe)."""

    curve: ShiftedCurve

    @classmethod
    def for_curve(cls, curve: CurveLike, beta: float = None) -> "Contract":
        if beta is None:
            return cls(as_shifted(curve))
        return cls(shift(curve, beta))

    @property
    def beta(self) -> float:
        return self.curve.beta

    @property
    def n(self) -> int:
        return self.curve.n

    def payment_matrix(self, reports: np.ndarray) -> np.ndarray:
        """Pagos para cada fila de `reports`: v - <g, r> + g."""
        values = self.curve.values(reports)
        grads = self.curve.gradients(reports)
        offset = values - np.einsum("ij,ij->i", grads, reports)
        return offset[:, np.newaxis] + grads

    def payments_for(self, report: Posterior) -> np.ndarray:
        return self.payment_matrix(report.as_array()[np.newaxis, :])[0]


@dataclass(frozen=True)
class OverriddenContract(Contract):
    """
    Contrato manipulado: en los informes indicados paga un vector fijo en lugar del
    tangente. Sirve para que las auditorías demuestren que detectan contratos no veraces.
    """

    overrides: Dict[Tuple[float, ...], Tuple[float, ...]] = field(default_factory=dict)

    @classmethod
    def with_override(cls, contract: Contract, report: Posterior, payments: Sequence[float]) -> "OverriddenContract":
        if len(payments) != report.n:
            raise DimensionMismatchError(f"Se esperaban {report.n} pagos, recibidos {len(payments)}")
        overrides = dict(getattr(contract, "overrides", {}))
        overrides[report.probs] = tuple(float(p) for p in payments)
        return cls(contract.curve, overrides)

    def payment_matrix(self, reports: np.ndarray) -> np.ndarray:
        matrix = super().payment_matrix(reports)
        for probs, payments in self.overrides.items():
            target = np.asarray(probs, dtype=float)
            hits = np.all(np.abs(reports - target) <= OVERRIDE_MATCH_TOLERANCE, axis=1)
            matrix[hits] = payments
        return matrix


def payment_vector(contract: Contract, report: Posterior) -> PaymentVector:
    payments = contract.payments_for(report)
    return PaymentVector(tuple(float(p) for p in payments), report)


def expected_payment(pv: PaymentVector, belief: Posterior) -> float:
    """<belief, pagos>: pago esperado por un experto que cree `belief`."""
    if belief.n != len(pv.payments):
        raise DimensionMismatchError(f"Creencia de dimensión {belief.n} frente a {len(pv.payments)} pagos")
    return math.fsum(b * p for b, p in zip(belief.probs, pv.payments))


def tangent_value(contract: Contract, report: Posterior, at: Posterior) -> float:
    """
    Valor en `at` del hiperplano tangente en `report`.

    Sobre el símplice L(rho) = sum_i rho_i * pago_i, así que en el vértice rho_hat_i
    coincide exactamente con pago_i.
    """
    return expected_payment(payment_vector(contract, report), at)
