"""
Truncated Fock-Space Vectors

This module defines finite coefficient vectors on the Fock basis |0>, |1>, ...,
their inner products and norms, and the Fock coefficients of canonical
coherent states |alpha>. Tails beyond the truncation are handled analytically
by the gamma kernel, not here.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import RejectedInputError
from .special import log_factorial
from .summation import complex_neumaier_sum, neumaier_cumsum, neumaier_sum


@dataclass(frozen=True)
class ComplexAmplitude:
    """Coherent amplitude alpha = re + i*im."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise RejectedInputError(f"Coherent amplitude must be finite, got ({self.re}, {self.im})")

    @classmethod
    def coerce(cls, value: Union["ComplexAmplitude", complex, float]) -> "ComplexAmplitude":
        if isinstance(value, ComplexAmplitude):
            return value
        z = complex(value)
        return cls(z.real, z.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def modulus_sq(self) -> float:
        return self.re * self.re + self.im * self.im


@dataclass(frozen=True, eq=False)
class FockVector:
    """Finite coefficient sequence c_0..c_N on the Fock basis."""

    coeffs: np.ndarray

    def __post_init__(self):
        array = np.array(self.coeffs, dtype=complex).ravel()
        if array.size < 1:
            raise RejectedInputError("A Fock vector needs at least one coefficient")
        if not np.all(np.isfinite(array)):
            raise RejectedInputError("Fock coefficients must be finite")
        array.setflags(write=False)
        object.__setattr__(self, "coeffs", array)

    @classmethod
    def zeros(cls, dim: int) -> "FockVector":
        return cls(np.zeros(_check_dim(dim), dtype=complex))

    @classmethod
    def basis(cls, m: int, dim: int) -> "FockVector":
        """The number state e_m embedded in dimension dim."""
        dim = _check_dim(dim)
        if not 0 <= m < dim:
            raise RejectedInputError(f"Mode {m} outside dimension {dim}")
        coeffs = np.zeros(dim, dtype=complex)
        coeffs[m] = 1.0
        return cls(coeffs)

    @property
    def dim(self) -> int:
        return int(self.coeffs.size)

    def padded(self, dim: int) -> "FockVector":
        """Zero-pad to dim (the l2 embedding); never truncates."""
        if dim < self.dim:
            raise RejectedInputError(f"Cannot pad a dim-{self.dim} vector down to {dim}")
        if dim == self.dim:
            return self
        coeffs = np.zeros(dim, dtype=complex)
        coeffs[:self.dim] = self.coeffs
        return FockVector(coeffs)

    def norm_sq(self) -> float:
        return neumaier_sum(np.abs(self.coeffs) ** 2)

    def tail_mass(self) -> np.ndarray:
        """tail[n] = sum_{k>n} |c_k|^2, accumulated from the top mode down."""
        weights = np.abs(self.coeffs[::-1]) ** 2
        from_top = neumaier_cumsum(weights)[::-1]
        tail = np.zeros(self.dim)
        tail[:-1] = from_top[1:]
        return tail

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"FockVector(dim={self.dim}, norm={math.sqrt(self.norm_sq()):.6g})"


_EPS = float(np.finfo(float).eps)
_SHRINK_ULPS = 2.0
_MAX_RESCALES = 8


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 1:
        raise RejectedInputError(f"Dimension must be a positive integer, got {dim}")
    return int(dim)


def coherent_coefficients(alpha: Union[ComplexAmplitude, complex, float], dim: int) -> FockVector:
    """
    Fock coefficients exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n < dim.

    Magnitudes are evaluated as exp(n ln|alpha| - |alpha|^2/2 - ln(n!)/2) and
    phases as n*arg(alpha), so nothing overflows for |alpha| <= 50, n <= 4096.
    """
    amplitude = ComplexAmplitude.coerce(alpha)
    dim = _check_dim(dim)
    if amplitude.modulus_sq == 0.0:
        return FockVector.basis(0, dim)

    n = np.arange(dim)
    modulus = math.sqrt(amplitude.modulus_sq)
    log_magnitude = n * math.log(modulus) - 0.5 * amplitude.modulus_sq - 0.5 * log_factorial(n)
    phase = n * cmath.phase(amplitude.value)
    coeffs = np.exp(log_magnitude) * np.exp(1j * phase)
    # a truncated coherent state has norm^2 = Q_{dim-1} <= 1; rounding may not exceed it
    for _ in range(_MAX_RESCALES):
        norm_sq = neumaier_sum(np.abs(coeffs) ** 2)
        if norm_sq <= 1.0:
            break
        coeffs = coeffs * ((1.0 - _SHRINK_ULPS * _EPS) / math.sqrt(norm_sq))
    return FockVector(coeffs)


def inner(lhs: FockVector, rhs: FockVector) -> complex:
    """<lhs|rhs> = sum conj(c_n) d_n; the shorter vector is zero-padded."""
    dim = min(lhs.dim, rhs.dim)
    # padding contributes only zero products
    return complex_neumaier_sum(np.conj(lhs.coeffs[:dim]) * rhs.coeffs[:dim])


def norm(v: FockVector) -> float:
    return math.sqrt(v.norm_sq())


def coherent_overlap(alpha: Union[ComplexAmplitude, complex, float],
                     beta: Union[ComplexAmplitude, complex, float]) -> complex:
    """Untruncated <alpha|beta> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha) beta)."""
    a = ComplexAmplitude.coerce(alpha)
    b = ComplexAmplitude.coerce(beta)
    return cmath.exp(-0.5 * a.modulus_sq - 0.5 * b.modulus_sq + a.value.conjugate() * b.value)


def projector_distance(alpha: Union[ComplexAmplitude, complex, float],
                       beta: Union[ComplexAmplitude, complex, float]) -> float:
    """Operator norm of |alpha><alpha| - |beta><beta|, i.e. sqrt(1 - exp(-|alpha - beta|^2))."""
    a = ComplexAmplitude.coerce(alpha)
    b = ComplexAmplitude.coerce(beta)
    gap_sq = abs(a.value - b.value) ** 2
    return math.sqrt(-math.expm1(-gap_sq))
