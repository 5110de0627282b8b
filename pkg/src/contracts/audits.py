"""
Auditorías de un contrato sobre la rejilla del símplice: propiedad (properness),
identidad del pago esperado y unicidad del contrato tangente.

Las comprobaciones se reparten por bloques de creencias en un ThreadPoolExecutor y
se combinan en orden de bloque, de modo que el resultado no depende del número de
hilos (AUDIT_WORKERS).
"""

import logging
import math
import os
import concurrent.futures
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from core.errors import DimensionMismatchError, ExpectedPaymentMismatchError
from core.simplex import Posterior, grid_matrix, grid_parts, grid_size, simplex_grid
from contracts.contract import Contract, payment_vector

load_dotenv()

logger = logging.getLogger(__name__)

AUDIT_TOLERANCE = 1e-9
BLOCK_ROWS = 512
MIN_BINARY_STEP = 1e-4
MAX_GRID_POINTS = 2_000_000


@dataclass
class ProperReport:
    passed: bool
    grid_step: float
    pairs_checked: int
    worst_violation: float
    witness_belief: Optional[Posterior] = None
    witness_report: Optional[Posterior] = None
    identity_gap: float = 0.0


@dataclass
class UniquenessResult:
    equals_tangent: bool
    max_deviation: float
    witness_belief: Optional[Posterior] = None
    gain: float = 0.0
    grid_step: Optional[float] = None

    @property
    def counterexample_found(self) -> bool:
        return self.witness_belief is not None


class ContractAuditor:
    """Recorre la rejilla del símplice con un pool de hilos configurable."""

    def __init__(self, workers: int = None):
        self.workers = workers or int(os.getenv("AUDIT_WORKERS", 4))

    def _blocks(self, rows: int) -> List[Tuple[int, int]]:
        return [(start, min(start + BLOCK_ROWS, rows)) for start in range(0, rows, BLOCK_ROWS)]

    def check_properness(self, contract: Contract, step: float) -> ProperReport:
        points = simplex_grid(contract.n, step)
        grid = grid_matrix(points)
        values = contract.curve.values(grid)
        payments = contract.payment_matrix(grid)

        def scan(block: Tuple[int, int]) -> Tuple[float, int, int, float]:
            start, stop = block
            expected = grid[start:stop] @ payments.T
            excess = expected - values[start:stop, np.newaxis]
            flat = int(np.argmax(excess))
            row, col = divmod(flat, excess.shape[1])
            diagonal = expected[np.arange(stop - start), np.arange(start, stop)]
            gap = float(np.max(np.abs(diagonal - values[start:stop])))
            return float(excess[row, col]), start + row, col, gap

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
            results = list(executor.map(scan, self._blocks(len(points))))

        worst, belief_idx, report_idx, identity_gap = results[0]
        for violation, b_idx, r_idx, gap in results[1:]:
            if violation > worst:
                worst, belief_idx, report_idx = violation, b_idx, r_idx
            identity_gap = max(identity_gap, gap)

        passed = worst <= AUDIT_TOLERANCE and identity_gap <= AUDIT_TOLERANCE
        report = ProperReport(
            passed=passed,
            grid_step=step,
            pairs_checked=len(points) ** 2,
            worst_violation=worst,
            identity_gap=identity_gap,
        )
        if worst > AUDIT_TOLERANCE:
            report.witness_belief = points[belief_idx]
            report.witness_report = points[report_idx]
            logger.info(
                f"[CONTRATO] Informe rentable: creencia {points[belief_idx]} informa "
                f"{points[report_idx]} y gana {worst:.6g}"
            )
        return report

    def _best_gain(self, grid: np.ndarray, values: np.ndarray, alt: np.ndarray) -> Tuple[float, int]:
        def scan(block: Tuple[int, int]) -> Tuple[float, int]:
            start, stop = block
            gain = grid[start:stop] @ alt - values[start:stop]
            row = int(np.argmax(gain))
            return float(gain[row]), start + row

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
            results = list(executor.map(scan, self._blocks(len(grid))))
        best, index = results[0]
        for gain, idx in results[1:]:
            if gain > best:
                best, index = gain, idx
        return best, index

    def verify_uniqueness(
        self, contract: Contract, report: Posterior, alt: Sequence[float], step: float
    ) -> UniquenessResult:
        alt_vec = np.asarray(alt, dtype=float)
        if alt_vec.shape != (report.n,):
            raise DimensionMismatchError(f"Se esperaban {report.n} pagos alternativos, recibidos {len(alt_vec)}")

        target = contract.curve.values(report.as_array()[np.newaxis, :])[0]
        offered = math.fsum(r * a for r, a in zip(report.probs, alt_vec))
        if abs(offered - target) > AUDIT_TOLERANCE:
            raise ExpectedPaymentMismatchError(
                f"El pago esperado alternativo {offered!r} no coincide con P_beta(informe) = {target!r}"
            )

        tangent = payment_vector(contract, report).as_array()
        deviation = float(np.max(np.abs(alt_vec - tangent)))
        if deviation <= AUDIT_TOLERANCE:
            return UniquenessResult(equals_tangent=True, max_deviation=deviation)

        k = grid_parts(step)
        while True:
            current_step = 1.0 / k
            points = simplex_grid(report.n, current_step)
            grid = grid_matrix(points)
            gain, index = self._best_gain(grid, contract.curve.values(grid), alt_vec)
            if gain > AUDIT_TOLERANCE:
                logger.info(
                    f"[CONTRATO] Contraejemplo de unicidad en {points[index]} (ganancia {gain:.3e}, paso {current_step:g})"
                )
                return UniquenessResult(
                    equals_tangent=False,
                    max_deviation=deviation,
                    witness_belief=points[index],
                    gain=gain,
                    grid_step=current_step,
                )
            if not self._can_refine(report.n, 2 * k):
                logger.warning(f"[CONTRATO] Sin contraejemplo hasta el paso {current_step:g}")
                return UniquenessResult(
                    equals_tangent=False, max_deviation=deviation, gain=gain, grid_step=current_step
                )
            k *= 2

    @staticmethod
    def _can_refine(n: int, k: int) -> bool:
        if n == 2:
            return 1.0 / k >= MIN_BINARY_STEP
        return grid_size(n, 1.0 / k) <= MAX_GRID_POINTS


def check_properness(contract: Contract, step: float) -> ProperReport:
    """Para cada par (creencia, informe) de la rejilla: <creencia, pagos(informe)> <= P_beta(creencia) + 1e-9."""
    return ContractAuditor().check_properness(contract, step)


def verify_uniqueness(contract: Contract, report: Posterior, alt: Sequence[float], step: float) -> UniquenessResult:
    """
    Busca una creencia rho' para la que informar `report` con pagos `alt` supera a
    informar la verdad (que rinde P_beta(rho')). Si `alt` coincide con los pagos
    tangentes certifica la igualdad. Si la rejilla pedida no basta, se refina a la mitad.
    """
    return ContractAuditor().verify_uniqueness(contract, report, alt, step)
