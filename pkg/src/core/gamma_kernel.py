"""
Regularized Incomplete Gamma Kernel

I_n(R) = int_0^R y^n e^{-y} / n! dy and its complement Q_n(R) = 1 - I_n(R)
for integer n. Q_n(R) is the Poisson head e^{-R} sum_{k<=n} R^k/k! and I_n(R)
the Poisson tail sum_{k>n}; both are positive series, so neither loses
precision to cancellation. Integration by parts gives the recurrence

    I_n(R) = I_{n-1}(R) - R^n e^{-R} / n!,

which the table satisfies by construction and reports as a residual.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import RejectedInputError
from .integration import DEFAULT_MAX_INTERVALS, adaptive_simpson
from .special import log_factorial, log_poisson_terms
from .summation import neumaier_cumsum, neumaier_sum

logger = logging.getLogger(__name__)

# Poisson terms this far (in log) below the reference term are dropped from the tail
_TAIL_LOG_CUTOFF = 45.0


@dataclass(frozen=True, eq=False)
class GammaTable:
    """I_n(R) and Q_n(R) for n = 0..max_n at a fixed R, stored independently."""

    radius_sq: float
    I: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        for array in (self.I, self.Q):
            array.setflags(write=False)

    @property
    def max_n(self) -> int:
        return int(self.I.size) - 1

    def recurrence_residuals(self) -> np.ndarray:
        """|I_n - (I_{n-1} - R^n e^{-R}/n!)| for n = 1..max_n."""
        if self.max_n < 1:
            return np.zeros(0)
        n = np.arange(1, self.max_n + 1)
        steps = poisson_terms(self.radius_sq, n)
        return np.abs(self.I[1:] - (self.I[:-1] - steps))

    def complement_residuals(self) -> np.ndarray:
        return np.abs(self.I + self.Q - 1.0)

    def property_violations(self) -> List[str]:
        """Names of the kernel properties this table breaks (empty when sound)."""
        violations = []
        if np.any(self.I < 0.0) or np.any(self.I > 1.0):
            violations.append("I_n outside [0, 1]")
        if np.any(self.Q < 0.0) or np.any(self.Q > 1.0):
            violations.append("Q_n outside [0, 1]")
        if np.any(np.diff(self.I) > 0.0):
            violations.append("I_n increasing in n")
        if np.any(np.diff(self.Q) < 0.0):
            violations.append("Q_n decreasing in n")
        if np.any(self.complement_residuals() > 1e-14):
            violations.append("|I_n + Q_n - 1| above 1e-14")
        if np.any(self.recurrence_residuals() > 1e-12):
            violations.append("recurrence residual above 1e-12")
        return violations


def _check_radius_sq(radius_sq: float) -> float:
    radius_sq = float(radius_sq)
    if not math.isfinite(radius_sq) or radius_sq < 0.0:
        raise RejectedInputError(f"radius_sq must be finite and nonnegative, got {radius_sq}")
    return radius_sq


def _check_count(n: int, name: str) -> int:
    if int(n) != n or n < 0:
        raise RejectedInputError(f"{name} must be a nonnegative integer, got {n}")
    return int(n)


def poisson_terms(radius_sq: float, n) -> np.ndarray:
    """R^n e^{-R} / n!, evaluated in log space (0 at R = 0 except n = 0)."""
    ks = np.asarray(n, dtype=np.int64)
    if radius_sq == 0.0:
        return np.where(ks == 0, 1.0, 0.0)
    return np.exp(log_poisson_terms(radius_sq, ks))


def poisson_term(radius_sq: float, n: int) -> float:
    return float(poisson_terms(_check_radius_sq(radius_sq), _check_count(n, "n")))


def _tail_end(radius_sq: float, max_n: int) -> int:
    """Last index whose Poisson term still matters for I_{max_n}."""
    k = max(max_n + 1, int(math.floor(radius_sq)) + 1)
    reference = float(log_poisson_terms(radius_sq, np.array(max_n + 1)))
    log_term = float(log_poisson_terms(radius_sq, np.array(k)))
    log_r = math.log(radius_sq)
    # past the Poisson mode terms decrease, so stepping forward terminates
    while log_term > reference - _TAIL_LOG_CUTOFF and log_term > -745.0:
        k += 1
        log_term += log_r - math.log(k)
    return k


def gamma_table(radius_sq: float, max_n: int) -> GammaTable:
    """
    Tabulate I_n(R) and Q_n(R) for n = 0..max_n.

    Q_n accumulates the head series forward and I_n the tail series backward,
    each with compensated summation; both are divided by the total Poisson mass
    so that the log-space rounding of individual terms cancels out of I + Q.
    Monotonicity in n is exact: every step adds a nonnegative term.
    When max_n + 1 <= R the table stops at max_n and takes I_n = 1 - Q_n,
    so the cost grows with max_n rather than with R.
    """
    radius_sq = _check_radius_sq(radius_sq)
    max_n = _check_count(max_n, "max_n")
    if radius_sq == 0.0:
        return GammaTable(0.0, np.zeros(max_n + 1), np.ones(max_n + 1))

    if max_n + 1 <= radius_sq:
        return _head_only_table(radius_sq, max_n)

    k_end = _tail_end(radius_sq, max_n)
    terms = poisson_terms(radius_sq, np.arange(k_end + 1))
    head = neumaier_cumsum(terms)
    tail_from = neumaier_cumsum(terms[::-1])[::-1]
    total = head[-1]

    Q = np.clip(head[:max_n + 1] / total, 0.0, 1.0)
    I = np.clip(tail_from[1:max_n + 2] / total, 0.0, 1.0)
    # rounding in the last place must not break monotonicity
    Q = np.maximum.accumulate(Q)
    I = np.minimum.accumulate(I)
    return GammaTable(radius_sq, I, Q)


def _head_only_table(radius_sq: float, max_n: int) -> GammaTable:
    """
    Table for max_n below the Poisson mode, from terms 0..max_n only.

    Every Q_n here is at most about 1/2, so I_n = 1 - Q_n loses nothing to
    cancellation and the tail series past the mode is never needed.
    """
    terms = poisson_terms(radius_sq, np.arange(max_n + 1))
    Q = np.maximum.accumulate(np.clip(neumaier_cumsum(terms), 0.0, 1.0))
    I = np.minimum.accumulate(1.0 - Q)
    return GammaTable(radius_sq, I, Q)


def regularized_complement(radius_sq: float, n: int) -> float:
    """Q_n(R) alone from the compensated head series."""
    radius_sq = _check_radius_sq(radius_sq)
    n = _check_count(n, "n")
    if radius_sq == 0.0:
        return 1.0
    return min(1.0, neumaier_sum(poisson_terms(radius_sq, np.arange(n + 1))))


def gamma_oracle(radius_sq: float, n: int, tol: float = 1e-12,
                 max_intervals: int = DEFAULT_MAX_INTERVALS) -> float:
    """
    I_n(R) by adaptive Simpson quadrature of y^n e^{-y} / n! over [0, R].

    Independent of the series path. Raises AccuracyError (with the best
    estimate) when tol is out of reach within max_intervals subintervals.
    """
    radius_sq = _check_radius_sq(radius_sq)
    n = _check_count(n, "n")
    if radius_sq == 0.0:
        return 0.0
    log_norm = log_factorial(n)

    def integrand(y: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_y = np.log(y)
        values = np.exp(n * log_y - y - log_norm) if n > 0 else np.exp(-y)
        return np.where(y > 0.0, values, 1.0 if n == 0 else 0.0)

    panels = max(4, int(math.ceil(radius_sq / 0.5)))
    breakpoints = list(np.linspace(0.0, radius_sq, panels + 1)[1:-1])
    if 0 < n < radius_sq:
        breakpoints.append(float(n))
    result = adaptive_simpson(integrand, 0.0, radius_sq, tol, breakpoints, max_intervals)
    logger.debug(f"gamma_oracle R={radius_sq} n={n}: {result.value} "
                 f"(err~{result.error_estimate:.2e}, {result.intervals} intervals)")
    return result.value


def gamma_limit_check(n: int, radii: Sequence[float]) -> np.ndarray:
    """I_n(R) along strictly increasing arguments R (approaches 1 as R grows)."""
    n = _check_count(n, "n")
    values = [_check_radius_sq(R) for R in radii]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise RejectedInputError("radii must be strictly increasing")
    return np.array([gamma_table(R, n).I[n] for R in values])
