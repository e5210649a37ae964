"""
Truncated Resolution of the Identity

A_r = pi^{-1} int_{|alpha| <= r} |alpha><alpha| d^2 alpha is diagonal on the
Fock basis with eigenvalues I_n(r^2). This module applies it, measures how far
it is from the identity on a given vector (strong error, weak defect), and
picks a disk radius that brings the strong error below a target.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..core.errors import RejectedInputError
from ..core.fock import FockVector
from ..core.gamma_kernel import GammaTable, gamma_table, regularized_complement
from ..core.summation import complex_neumaier_sum, neumaier_sum

logger = logging.getLogger(__name__)

DEFAULT_BISECTION_STEPS = 40
MAX_RADIUS_DOUBLINGS = 64


@dataclass(frozen=True, eq=False)
class TruncatedResolution:
    """A_r on the first dim Fock modes, stored as its eigenvalue table at R = r^2."""

    radius: float
    dim: int
    eigenvalues: GammaTable

    @classmethod
    def at_radius(cls, radius: float, dim: int) -> "TruncatedResolution":
        radius = float(radius)
        if not math.isfinite(radius) or radius <= 0.0:
            raise RejectedInputError(f"Disk radius must be finite and positive, got {radius}")
        if int(dim) != dim or dim < 1:
            raise RejectedInputError(f"Dimension must be a positive integer, got {dim}")
        return cls(radius, int(dim), gamma_table(radius * radius, int(dim) - 1))

    @property
    def diagonal(self) -> np.ndarray:
        """Eigenvalues I_n(r^2), n < dim."""
        return self.eigenvalues.I

    @property
    def complement(self) -> np.ndarray:
        """Defects Q_n(r^2) = 1 - I_n(r^2), stored, never re-derived."""
        return self.eigenvalues.Q

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal.astype(complex))

    def _check_vector(self, v: FockVector) -> None:
        if v.dim > self.dim:
            raise RejectedInputError(
                f"Vector of dim {v.dim} exceeds the resolution dimension {self.dim}")


def apply(res: TruncatedResolution, v: FockVector) -> FockVector:
    """(A_r v)_n = I_n(r^2) v_n; output has v's dimension."""
    res._check_vector(v)
    return FockVector(res.diagonal[:v.dim] * v.coeffs)


def strong_error(res: TruncatedResolution, v: FockVector) -> float:
    """||(I - A_r) v|| = sqrt(sum Q_n(r^2)^2 |v_n|^2)."""
    res._check_vector(v)
    weighted = res.complement[:v.dim] * np.abs(v.coeffs)
    return math.sqrt(neumaier_sum(weighted * weighted))


def weak_defect(res: TruncatedResolution, u: FockVector, v: FockVector) -> complex:
    """<u|v> - <u|A_r v> = sum Q_n(r^2) conj(u_n) v_n."""
    res._check_vector(u)
    res._check_vector(v)
    dim = min(u.dim, v.dim)
    return complex_neumaier_sum(res.complement[:dim] * np.conj(u.coeffs[:dim]) * v.coeffs[:dim])


def select_radius(v: FockVector, eps: float,
                  bisection_steps: int = DEFAULT_BISECTION_STEPS) -> float:
    """
    A radius R with strong_error(A_R, v) < eps.

    First the smallest head size K whose tail mass sum_{n>K} |v_n|^2 is below
    eps^2/2, then the smallest R (doubling from 1, then bisection) with
    Q_K(R^2)^2 ||v||^2 < eps^2/2. Since Q_n <= Q_K for n <= K, the two halves
    together keep the squared error below eps^2.
    """
    if not (math.isfinite(eps) and eps > 0.0):
        raise RejectedInputError(f"eps must be positive, got {eps}")
    norm_sq = v.norm_sq()
    if norm_sq <= 0.0:
        raise RejectedInputError("select_radius needs a nonzero vector")

    budget = 0.5 * eps * eps
    tail = v.tail_mass()
    K = int(np.argmax(tail < budget))

    def meets_budget(radius: float) -> bool:
        defect = regularized_complement(radius * radius, K)
        return defect * defect * norm_sq < budget

    hi = 1.0
    doublings = 0
    while not meets_budget(hi):
        hi *= 2.0
        doublings += 1
        if doublings > MAX_RADIUS_DOUBLINGS:
            raise RejectedInputError(f"No radius found for eps={eps} within 2^{MAX_RADIUS_DOUBLINGS}")
    lo = 0.0 if doublings == 0 else hi / 2.0
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        if meets_budget(mid):
            hi = mid
        else:
            lo = mid

    logger.info(f"select_radius: eps={eps} head K={K} radius={hi!r}")
    return hi
