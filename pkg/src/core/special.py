"""
Log-space factorials and Poisson weights shared by the Fock and gamma modules.
"""

import math
from typing import Union

import numpy as np
from scipy.special import gammaln

from .errors import RejectedInputError

# ln(n!) below this index comes from the exact integer factorial
EXACT_FACTORIAL_LIMIT = 20

_EXACT_LOG_FACTORIALS = np.array(
    [math.log(math.factorial(k)) for k in range(EXACT_FACTORIAL_LIMIT + 1)]
)

ArrayOrInt = Union[int, np.ndarray]


def log_factorial(k: ArrayOrInt) -> Union[float, np.ndarray]:
    """ln(k!) for nonnegative integers, elementwise."""
    ks = np.asarray(k, dtype=np.int64)
    if np.any(ks < 0):
        raise RejectedInputError("log_factorial needs nonnegative integers")
    out = np.asarray(gammaln(ks + 1.0), dtype=float)
    small = ks <= EXACT_FACTORIAL_LIMIT
    if np.any(small):
        out = np.where(small, _EXACT_LOG_FACTORIALS[np.minimum(ks, EXACT_FACTORIAL_LIMIT)], out)
    if np.ndim(k) == 0:
        return float(out)
    return out


def log_poisson_terms(radius_sq: float, k: np.ndarray) -> np.ndarray:
    """ln(R^k e^{-R} / k!) for R > 0."""
    ks = np.asarray(k, dtype=np.int64)
    return ks * math.log(radius_sq) - radius_sq - log_factorial(ks)
