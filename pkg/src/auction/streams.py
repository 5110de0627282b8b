"""
Flujos aleatorios con nombre derivados de la semilla del escenario.

Toda la aleatoriedad sale de SeedSequence([semilla, índice]) dividida en tres flujos
independientes, para poder reproducir por separado los desempates de la subasta,
la realización del posterior y el sorteo del resultado del evento.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class MechanismStreams:
    ties: np.random.Generator
    posterior: np.random.Generator
    outcome: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int, index: int = 0) -> "MechanismStreams":
        children = np.random.SeedSequence([int(seed), int(index)]).spawn(3)
        ties, posterior, outcome = (np.random.default_rng(child) for child in children)
        return cls(ties=ties, posterior=posterior, outcome=outcome)
