"""
Tipos del símplice de probabilidad y utilidades de rejilla.

Un posterior es un vector denso de n probabilidades (n pequeño, n <= 8 en la
práctica). Nunca se renormaliza en silencio: si la entrada no suma 1 se lanza
un error explícito para no ocultar erratas en los ficheros de escenario.
"""

import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy.special import comb

from core.errors import (
    InvalidStepError,
    NegativeEntryError,
    SumNotOneError,
    TooFewOutcomesError,
)

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Posterior:
    """Distribución sobre los n resultados del evento G."""

    probs: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{p:.6g}" for p in self.probs) + ")"


@dataclass(frozen=True)
class Prior:
    """Prior común y público rho0."""

    value: Posterior

    @property
    def probs(self) -> Tuple[float, ...]:
        return self.value.probs

    @property
    def n(self) -> int:
        return self.value.n

    def as_array(self) -> np.ndarray:
        return self.value.as_array()


def make_posterior(values: Sequence[float]) -> Posterior:
    """Valida y construye un Posterior. No renormaliza."""
    probs = tuple(float(v) for v in values)
    if len(probs) < 2:
        raise TooFewOutcomesError(f"Se necesitan al menos 2 resultados, recibidos {len(probs)}")
    for i, p in enumerate(probs):
        if not math.isfinite(p) or p < 0.0:
            raise NegativeEntryError(f"Entrada {i} no válida: {p}")
    total = math.fsum(probs)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise SumNotOneError(f"Las probabilidades suman {total!r}, no 1")
    return Posterior(probs)


def make_prior(values: Sequence[float]) -> Prior:
    return Prior(make_posterior(values))


def vertex(n: int, i: int) -> Posterior:
    """Vértice rho_hat_i: certeza en el resultado i."""
    probs = [0.0] * n
    probs[i] = 1.0
    return make_posterior(probs)


def binary_posterior(rho: float) -> Posterior:
    """Posterior binario a partir de la probabilidad del resultado 1."""
    return make_posterior([rho, 1.0 - rho])


def grid_parts(step: float) -> int:
    """Número k de partes en que `step` divide a 1."""
    if not math.isfinite(step) or step <= 0.0 or step > 1.0:
        raise InvalidStepError(f"Paso de rejilla fuera de rango: {step}")
    k = int(round(1.0 / step))
    if k < 1 or abs(k * step - 1.0) > 1e-9:
        raise InvalidStepError(f"El paso {step} no divide 1 en partes enteras")
    return k


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def simplex_grid(n: int, step: float) -> List[Posterior]:
    """
    Todos los puntos del símplice cuyas coordenadas son múltiplos de `step`.

    El número de puntos es C(k + n - 1, n - 1) con k = 1 / step. Las coordenadas se
    calculan como j / k para que la suma sea exacta salvo redondeo.
    """
    if n < 2:
        raise TooFewOutcomesError(f"Se necesitan al menos 2 resultados, recibidos {n}")
    k = grid_parts(step)
    points = [
        make_posterior([j / k for j in counts])
        for counts in _compositions(k, n)
    ]
    return points


def grid_size(n: int, step: float) -> int:
    k = grid_parts(step)
    return int(comb(k + n - 1, n - 1, exact=True))


def grid_matrix(points: Sequence[Posterior]) -> np.ndarray:
    """Apila una lista de posteriores en una matriz (puntos x n)."""
    return np.array([p.probs for p in points], dtype=float)
