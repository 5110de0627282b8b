"""
Jerarquía de excepciones del simulador.

Los errores de validación de entrada heredan también de ValueError para que
el código que ya captura ValueError siga funcionando.
"""

from typing import List, Tuple


class MechanismError(Exception):
    """Raíz de todos los errores propios del simulador."""


# --- Posteriores y rejilla del símplice ---

class InvalidPosteriorError(MechanismError, ValueError):
    """Vector de probabilidades no válido."""


class NegativeEntryError(InvalidPosteriorError):
    pass


class SumNotOneError(InvalidPosteriorError):
    pass


class TooFewOutcomesError(InvalidPosteriorError):
    pass


class InvalidStepError(MechanismError, ValueError):
    """El paso de la rejilla no divide 1 en un número entero de partes."""


class DimensionMismatchError(MechanismError, ValueError):
    pass


# --- Curvas, tecnologías y expertos ---

class EmptyActionSetError(MechanismError, ValueError):
    pass


class InvalidTechnologyError(MechanismError, ValueError):
    """Tecnología que no cumple sus invariantes (pesos, soporte o media)."""

    def __init__(self, message: str, violations: List[str] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class IndexOutOfRangeError(MechanismError, IndexError):
    pass


# --- Contratos ---

class ExpectedPaymentMismatchError(MechanismError, ValueError):
    """El pago alternativo no reproduce P_beta en el informe dado."""


class BoundaryPointError(MechanismError, ValueError):
    """Diferencias centrales pedidas demasiado cerca del borde del ortante."""


# --- Riesgo máximo ---

class NotBinaryError(MechanismError, ValueError):
    pass


class NoBracketError(MechanismError, ValueError):
    """La restricción no cambia de signo en el intervalo: nunca es activa."""


class EmptyFeasibleSetError(MechanismError, ValueError):
    pass


class UnsupportedForNError(MechanismError, ValueError):
    pass


# --- Escenarios ---

class ScenarioParseError(MechanismError, ValueError):
    pass


class ScenarioValidationError(MechanismError, ValueError):
    """Agrupa todos los fallos de validación con la ruta del campo afectado."""

    def __init__(self, errors: List[Tuple[str, str]]):
        self.errors = list(errors)
        lines = [f"{location}: {message}" for location, message in self.errors]
        super().__init__("Escenario no válido:\n  " + "\n  ".join(lines))
