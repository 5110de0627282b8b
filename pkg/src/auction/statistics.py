"""
Estimación Monte Carlo de la utilidad del principal con intervalo de confianza
normal al 99 %.
"""

import logging
import math
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from auction.engine import MechanismEngine
from auction.scenario import Scenario

logger = logging.getLogger(__name__)

CONFIDENCE = 0.99


def mean_with_interval(samples: pd.Series, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    """Media (suma compensada) y semiancho del intervalo normal al nivel `confidence`."""
    values = np.asarray(samples, dtype=float)
    count = len(values)
    mean = math.fsum(values) / count
    if count < 2:
        return mean, 0.0
    deviation = float(np.std(values, ddof=1))
    z = float(norm.ppf(0.5 + confidence / 2.0))
    return mean, z * deviation / math.sqrt(count)


def estimate_principal_utility(scenario: Scenario, samples: int, seed: int = None) -> Tuple[float, float]:
    """
    Media de la utilidad del principal sobre `samples` ejecuciones independientes y
    semiancho del IC al 99 %. La semilla por defecto es la del escenario.
    """
    if samples < 1:
        raise ValueError(f"El número de muestras debe ser positivo, recibido {samples}")
    if seed is not None:
        scenario = scenario.with_overrides(seed=seed)
    runs = MechanismEngine(scenario).simulate(samples)
    mean, half_width = mean_with_interval(runs["principal_utility"])
    logger.info(f"[MONTECARLO] Utilidad del principal {mean:.6f} ± {half_width:.6f} ({samples} muestras)")
    return mean, half_width
