"""
Intervalo de informes admisibles en el caso binario.

En la parametrización escalar rho = prob(resultado 1) los pagos del contrato de P_beta son
    pago_1(rho) = P_beta(rho) + (1 - rho) P_beta'(rho)   (vértice rho = 1)
    pago_2(rho) = P_beta(rho) - rho P_beta'(rho)         (vértice rho = 0)
Por convexidad pago_1 es no decreciente y pago_2 no creciente, así que cada límite
de riesgo corta el intervalo [0, 1] por un solo lado:
    pago_2 >= -phi_e  ->  rho <= rho_max      pago_1 >= -phi_e  ->  rho >= rho_min
    pago_1 <=  phi_p  ->  rho <= cota_p       pago_2 <=  phi_p  ->  rho >= cota_p'
Cada frontera es la raíz de la ecuación de tangencia correspondiente y se localiza
por bisección.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from core.errors import NoBracketError, NotBinaryError
from core.records import ReportInterval
from curves.preference_curve import CurveLike, base_of, scalar_derivative, scalar_value, shift
from contracts.contract import Contract
from core.simplex import grid_parts
from maxrisk.limits import LIMIT_TOLERANCE, RiskLimits, payments_allowed

logger = logging.getLogger(__name__)

BISECTION_XTOL = 1e-10
COLLAPSE_TOLERANCE = 1e-9


EMPTY_INTERVAL = ReportInterval(None, None)


def scalar_payments(curve: CurveLike, rho: float):
    value = scalar_value(curve, rho)
    slope = scalar_derivative(curve, rho)
    return value + (1.0 - rho) * slope, value - rho * slope


def tangency_root(constraint: Callable[[float], float], lo: float = 0.0, hi: float = 1.0) -> float:
    """Raíz de una restricción monótona en [lo, hi]. NoBracketError si no cambia de signo."""
    f_lo, f_hi = constraint(lo), constraint(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NoBracketError(f"La restricción no cambia de signo en [{lo}, {hi}]")
    return bisect(constraint, lo, hi, xtol=BISECTION_XTOL)


def _upper_cut(constraint: Callable[[float], float]) -> Optional[float]:
    """Mayor rho con constraint(rho) >= 0 para una restricción no creciente; None si ninguno."""
    try:
        return tangency_root(constraint)
    except NoBracketError:
        return 1.0 if constraint(0.0) >= 0.0 else None


def _lower_cut(constraint: Callable[[float], float]) -> Optional[float]:
    """Menor rho con constraint(rho) >= 0 para una restricción no decreciente; None si ninguno."""
    try:
        return tangency_root(constraint)
    except NoBracketError:
        return 0.0 if constraint(1.0) >= 0.0 else None


def binary_report_bounds(curve: CurveLike, beta: float, limits: RiskLimits) -> ReportInterval:
    base = base_of(curve)
    if base.n != 2:
        raise NotBinaryError(f"Las cotas de informe solo existen para n = 2 (n = {base.n})")
    shifted = shift(base, beta)

    def pay_1(rho: float) -> float:
        return scalar_payments(shifted, rho)[0]

    def pay_2(rho: float) -> float:
        return scalar_payments(shifted, rho)[1]

    lower_bounds: List[Optional[float]] = [0.0]
    upper_bounds: List[Optional[float]] = [1.0]
    if math.isfinite(limits.phi_e):
        upper_bounds.append(_upper_cut(lambda r: pay_2(r) + limits.phi_e))
        lower_bounds.append(_lower_cut(lambda r: pay_1(r) + limits.phi_e))
    if math.isfinite(limits.phi_p):
        upper_bounds.append(_upper_cut(lambda r: limits.phi_p - pay_1(r)))
        lower_bounds.append(_lower_cut(lambda r: limits.phi_p - pay_2(r)))

    if any(bound is None for bound in lower_bounds + upper_bounds):
        return EMPTY_INTERVAL
    rho_min = min(1.0, max(lower_bounds))
    rho_max = max(0.0, min(upper_bounds))
    if rho_min > rho_max:
        if rho_min - rho_max > COLLAPSE_TOLERANCE:
            return EMPTY_INTERVAL
        rho_min = rho_max = 0.5 * (rho_min + rho_max)
    logger.debug(f"[RIESGO] beta={beta:g}: informes admisibles [{rho_min:.6f}, {rho_max:.6f}]")
    return ReportInterval(rho_min, rho_max)


def bounds_sweep(curve: CurveLike, betas: Sequence[float], limits: RiskLimits) -> pd.DataFrame:
    """Tabla (beta, rho_min, rho_max); un intervalo vacío deja NaN en ambas cotas."""
    rows = []
    for beta in betas:
        interval = binary_report_bounds(curve, beta, limits)
        rows.append({
            "beta": float(beta),
            "rho_min": np.nan if interval.is_empty else interval.rho_min,
            "rho_max": np.nan if interval.is_empty else interval.rho_max,
        })
    return pd.DataFrame(rows, columns=["beta", "rho_min", "rho_max"])


def allowed_report_table(curve: CurveLike, beta: float, limits: RiskLimits, step: float) -> pd.DataFrame:
    """
    Datos para dibujar los pagos en los vértices frente al informe rho, con la marca de
    admisibilidad y el pago esperado P_beta(rho) de un experto veraz.
    """
    base = base_of(curve)
    if base.n != 2:
        raise NotBinaryError(f"La tabla de informes solo existe para n = 2 (n = {base.n})")
    k = grid_parts(step)
    rho = np.arange(k + 1) / k
    reports = np.column_stack([rho, 1.0 - rho])
    contract = Contract.for_curve(base, beta)
    payments = contract.payment_matrix(reports)
    return pd.DataFrame({
        "rho": rho,
        "payment_outcome1": payments[:, 0],
        "payment_outcome2": payments[:, 1],
        "allowed": payments_allowed(payments, limits, LIMIT_TOLERANCE),
        "expected_payment": contract.curve.values(reports),
    })
