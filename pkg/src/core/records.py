"""
Registros compartidos entre los módulos del mecanismo y los oráculos de fuerza bruta:
valor de un experto, límites de riesgo e intervalo de informes admisibles.
"""

import math
from dataclasses import dataclass
from typing import Optional

from core.errors import MechanismError


@dataclass(frozen=True)
class ExpertValue:
    u: float
    best: int


@dataclass(frozen=True)
class RiskLimits:
    """phi_p: pago máximo del principal; phi_e: pérdida máxima del experto (inf = sin límite)."""

    phi_p: float = math.inf
    phi_e: float = math.inf

    def __post_init__(self):
        for name in ("phi_p", "phi_e"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0.0:
                raise MechanismError(f"{name} debe ser no negativo, recibido {value}")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.phi_p) and math.isinf(self.phi_e)


@dataclass(frozen=True)
class ReportInterval:
    """[rho_min, rho_max] en la probabilidad del resultado 1; None en ambos si vacío."""

    rho_min: Optional[float]
    rho_max: Optional[float]

    @property
    def is_empty(self) -> bool:
        return self.rho_min is None or self.rho_max is None

    def contains(self, rho: float) -> bool:
        return not self.is_empty and self.rho_min <= rho <= self.rho_max

    def __str__(self) -> str:
        if self.is_empty:
            return "vacío"
        return f"[{self.rho_min:.6f}, {self.rho_max:.6f}]"
