"""
Generated-set least squares: approximation of periodic functions from samples at frac(k zeta), k = 1..n.
"""

from .config import (
    RANK_TOL,
    DEFAULT_EPS,
    MC_DEFAULT_TRIALS,
    SEARCH_MAX_TRIALS,
    WORKERS,
)

__all__ = [
    "RANK_TOL",
    "DEFAULT_EPS",
    "MC_DEFAULT_TRIALS",
    "SEARCH_MAX_TRIALS",
    "WORKERS",
]
