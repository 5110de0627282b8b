"""
Curvas de preferencia del principal P_beta(rho).

Las curvas están definidas en el ortante no negativo del espacio ambiente R^n, de
modo que la derivada parcial respecto a rho_i es la derivada ambiente. Toda
curva base cumple P_0(rho0) = 0; el desplazamiento beta vive en ShiftedCurve.

Familias disponibles:
  - QuadraticCurve: P_0(rho) = sum(rho_i^2) - sum(rho0_i^2) (tipo Brier, suave).
  - ActionSetCurve: P_0(rho) = max_a <rho, a> - max_a <rho0, a> (máximo de afines,
    con pliegues; en un pliegue se devuelve como subgradiente el vector de pagos
    de la acción maximizadora de menor índice).
  - NegatedQuadraticCurve: -||rho - rho0||^2. Es cóncava; solo sirve para
    comprobar que la auditoría de convexidad detecta violaciones.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from core.errors import DimensionMismatchError, EmptyActionSetError, MechanismError
from core.simplex import Posterior, Prior

logger = logging.getLogger(__name__)

Point = Union[Posterior, Sequence[float], np.ndarray]


def _as_vector(rho: Point) -> np.ndarray:
    if isinstance(rho, Posterior):
        return rho.as_array()
    return np.asarray(rho, dtype=float)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


class PreferenceCurve(ABC):
    """Curva base P_0. Subclases implementan valor y gradiente por lotes."""

    kind: str = "abstract"
    smooth: bool = True

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def values(self, points: np.ndarray) -> np.ndarray:
        """Valores en cada fila de `points` (m x n)."""

    @abstractmethod
    def gradients(self, points: np.ndarray) -> np.ndarray:
        """Gradiente (o subgradiente) en cada fila de `points`."""

    def value(self, rho: Point) -> float:
        x = _as_vector(rho)
        return float(self.values(x[np.newaxis, :])[0])

    def gradient(self, rho: Point) -> np.ndarray:
        x = _as_vector(rho)
        return self.gradients(x[np.newaxis, :])[0]


class QuadraticCurve(PreferenceCurve):
    kind = "quadratic"
    smooth = True

    def __init__(self, prior: Prior):
        super().__init__(prior.n)
        self.prior = prior
        self.offset = float(np.dot(prior.as_array(), prior.as_array()))

    def values(self, points: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", points, points) - self.offset

    def gradients(self, points: np.ndarray) -> np.ndarray:
        return 2.0 * points


class NegatedQuadraticCurve(PreferenceCurve):
    kind = "negated_quadratic"
    smooth = True

    def __init__(self, prior: Prior):
        super().__init__(prior.n)
        self.prior = prior
        self.center = _frozen(prior.as_array())

    def values(self, points: np.ndarray) -> np.ndarray:
        diff = points - self.center
        return -np.einsum("ij,ij->i", diff, diff)

    def gradients(self, points: np.ndarray) -> np.ndarray:
        return -2.0 * (points - self.center)


class ActionSetCurve(PreferenceCurve):
    """
    P(rho) = max_a sum_sigma rho(sigma) a(sigma) - normalizer.

    El principal elige la acción que maximiza su pago esperado dado el informe.
    """

    kind = "action_set"
    smooth = False

    def __init__(self, actions: np.ndarray, normalizer: float):
        actions = _frozen(actions)
        super().__init__(actions.shape[1])
        self.actions = actions
        self.normalizer = float(normalizer)

    def values(self, points: np.ndarray) -> np.ndarray:
        return (points @ self.actions.T).max(axis=1) - self.normalizer

    def gradients(self, points: np.ndarray) -> np.ndarray:
        # np.argmax devuelve el primer máximo: desempate por menor índice
        best = np.argmax(points @ self.actions.T, axis=1)
        return self.actions[best].copy()


@dataclass(frozen=True)
class ShiftedCurve:
    """P_beta(rho) = P_0(rho) - beta. El gradiente no depende de beta."""

    base: PreferenceCurve
    beta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta < 0.0:
            raise MechanismError(f"beta debe ser finito y no negativo, recibido {self.beta}")

    @property
    def n(self) -> int:
        return self.base.n

    def values(self, points: np.ndarray) -> np.ndarray:
        return self.base.values(points) - self.beta

    def gradients(self, points: np.ndarray) -> np.ndarray:
        return self.base.gradients(points)


CurveLike = Union[PreferenceCurve, ShiftedCurve]


def as_shifted(curve: CurveLike) -> ShiftedCurve:
    if isinstance(curve, ShiftedCurve):
        return curve
    return ShiftedCurve(curve, 0.0)


def base_of(curve: CurveLike) -> PreferenceCurve:
    if isinstance(curve, ShiftedCurve):
        return curve.base
    return curve


def shift(curve: CurveLike, beta: float) -> ShiftedCurve:
    return ShiftedCurve(base_of(curve), float(beta))


def evaluate(curve: CurveLike, rho: Point) -> float:
    """P_0(rho) - beta."""
    shifted = as_shifted(curve)
    return shifted.base.value(rho) - shifted.beta


def gradient(curve: CurveLike, rho: Point) -> np.ndarray:
    """Gradiente ambiente (subgradiente en los pliegues). Independiente de beta."""
    return base_of(curve).gradient(rho)


def from_action_set(actions: Sequence[Sequence[float]], prior: Prior) -> ActionSetCurve:
    """Construye la curva de un conjunto de acciones, normalizada a 0 en el prior."""
    if len(actions) == 0:
        raise EmptyActionSetError("El conjunto de acciones está vacío")
    lengths = {len(a) for a in actions}
    if len(lengths) != 1:
        raise DimensionMismatchError(f"Acciones de longitudes distintas: {sorted(lengths)}")
    (length,) = lengths
    if length != prior.n:
        raise DimensionMismatchError(f"Las acciones tienen {length} resultados y el prior {prior.n}")
    matrix = np.array(actions, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise MechanismError("Las acciones deben tener pagos finitos")
    normalizer = float((matrix @ prior.as_array()).max())
    return ActionSetCurve(matrix, normalizer)


def scalar_value(curve: CurveLike, rho: float) -> float:
    """P en la parametrización escalar binaria rho = prob(resultado 1)."""
    return evaluate(curve, np.array([rho, 1.0 - rho]))


def scalar_derivative(curve: CurveLike, rho: float) -> float:
    """dP/drho en la parametrización escalar: dP/drho_1 - dP/drho_2."""
    g = gradient(curve, np.array([rho, 1.0 - rho]))
    return float(g[0] - g[1])


class CurveFactory:
    """
    Instancia la curva base a partir de su especificación en el escenario.

    Especificaciones admitidas:
      {"kind": "quadratic"}
      {"kind": "action_set", "actions": [[...], ...]}
      {"kind": "negated_quadratic"}   (solo para autocomprobación del arnés)
    """

    KINDS = ("quadratic", "action_set", "negated_quadratic")

    @staticmethod
    def build(spec: Dict[str, Any], prior: Prior) -> PreferenceCurve:
        kind = spec.get("kind")
        if kind == "quadratic":
            return QuadraticCurve(prior)
        if kind == "action_set":
            return from_action_set(spec.get("actions") or [], prior)
        if kind == "negated_quadratic":
            logger.warning("[CURVA] Curva cóncava cargada: solo válida para autocomprobar el arnés")
            return NegatedQuadraticCurve(prior)
        raise MechanismError(f"Tipo de curva no soportado: {kind}")


def vertex_values(curve: CurveLike) -> List[float]:
    """Valores de la curva en los vértices rho_hat_i."""
    n = as_shifted(curve).n
    return [float(v) for v in as_shifted(curve).values(np.eye(n))]
