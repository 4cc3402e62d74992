"""Built-in examples: the two-state table, CHSH and the BB84 encoding."""
from __future__ import annotations

import numpy as np

from .core import ProbabilityTable, validate_table
from .games import chsh_fixture, chsh_game
from .quantum import (
    bb84_decodings,
    bb84_ensemble,
    bb84_marginal,
    bb84_model,
    two_state_model,
)

GAMMA = 0.5 + 1.0 / (2.0 * np.sqrt(2.0))

__all__ = [
    "GAMMA",
    "bb84_decodings",
    "bb84_ensemble",
    "bb84_marginal",
    "bb84_model",
    "chsh_fixture",
    "chsh_game",
    "chsh_table",
    "two_state_model",
    "two_state_table",
]


def two_state_table() -> ProbabilityTable:
    """States rho_00, rho_11; M_0 separates them, M_1 answers 0 or a fair coin."""
    return validate_table({
        "alphabet": [0, 1],
        "measurements": 2,
        "preparations": 2,
        "probs": [[[1, 0], [0, 1]], [[1, 0], [0.5, 0.5]]],
    })


def chsh_table() -> ProbabilityTable:
    return chsh_fixture()[2]
