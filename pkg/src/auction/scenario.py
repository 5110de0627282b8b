"""
Escenario ejecutable: prior, curva base, expertos, reserve, límites de riesgo,
semilla y número de muestras Monte Carlo. Se construye ya validado desde
cli.scenario_loader.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from core.simplex import Prior
from curves.preference_curve import PreferenceCurve
from experts.expert import Expert
from maxrisk.limits import RiskLimits

DEFAULT_SAMPLES = 100_000


@dataclass(frozen=True)
class Scenario:
    prior: Prior
    curve: PreferenceCurve
    experts: Tuple[Expert, ...]
    seed: int
    reserve: float = 0.0
    risk_limits: Optional[RiskLimits] = None
    samples: int = DEFAULT_SAMPLES
    curve_spec: Dict[str, Any] = field(default_factory=dict)
    name: str = ""

    @property
    def outcomes(self) -> int:
        return self.prior.n

    def expert_index(self, expert_id: str) -> int:
        for index, expert in enumerate(self.experts):
            if expert.expert_id == expert_id:
                return index
        raise KeyError(expert_id)

    def with_overrides(self, seed: int = None, samples: int = None, reserve: float = None) -> "Scenario":
        """Copia con semilla, muestras o reserve sustituidos (los flags de la CLI ganan)."""
        changes = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if samples is not None:
            changes["samples"] = int(samples)
        if reserve is not None:
            changes["reserve"] = float(reserve)
        return replace(self, **changes)
