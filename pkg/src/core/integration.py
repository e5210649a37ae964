"""
Adaptive Simpson Quadrature

One-dimensional adaptive Simpson rule with interval bisection and the
Richardson correction (S2 + (S2 - S1)/15). Intervals are refined level by
level with numpy, so the integrand must accept arrays. Used as the
independent oracle for the gamma kernel and for diagonal matrix elements.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import AccuracyError, RejectedInputError
from .summation import neumaier_sum

logger = logging.getLogger(__name__)

DEFAULT_MAX_INTERVALS = 2 ** 20


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an integral with its accumulated error estimate."""

    value: float
    error_estimate: float
    intervals: int


def adaptive_simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float,
                     breakpoints: Iterable[float] = (),
                     max_intervals: int = DEFAULT_MAX_INTERVALS) -> QuadratureResult:
    """
    Integrate f over [a, b] to an estimated absolute error <= tol.

    Each interval gets a share of tol proportional to its width. Breakpoints
    seed the initial partition; put them where the integrand has its bulk so
    a coarse first pass cannot miss it.
    """
    if not tol > 0:
        raise RejectedInputError(f"Tolerance must be positive, got {tol}")
    if not (np.isfinite(a) and np.isfinite(b)):
        raise RejectedInputError("Integration limits must be finite")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if b < a:
        flipped = adaptive_simpson(f, b, a, tol, breakpoints, max_intervals)
        return QuadratureResult(-flipped.value, flipped.error_estimate, flipped.intervals)

    edges = np.unique(np.concatenate((
        [a, b], [p for p in breakpoints if a < p < b]
    )).astype(float))
    span = b - a

    left, right = edges[:-1], edges[1:]
    mid = 0.5 * (left + right)
    f_left, f_mid, f_right = f(left), f(mid), f(right)
    whole = (right - left) / 6.0 * (f_left + 4.0 * f_mid + f_right)

    accepted_values = []
    accepted_errors = []
    n_accepted = 0

    while left.size:
        left_mid = 0.5 * (left + mid)
        right_mid = 0.5 * (mid + right)
        f_left_mid = f(left_mid)
        f_right_mid = f(right_mid)
        left_half = (mid - left) / 6.0 * (f_left + 4.0 * f_left_mid + f_mid)
        right_half = (right - mid) / 6.0 * (f_mid + 4.0 * f_right_mid + f_right)
        delta = left_half + right_half - whole

        width = right - left
        done = (np.abs(delta) <= 15.0 * tol * width / span) | (width <= 1e-15 * span)
        accepted_values.append((left_half + right_half + delta / 15.0)[done])
        accepted_errors.append(np.abs(delta[done]) / 15.0)
        n_accepted += int(done.sum())

        keep = ~done
        n_pending = 2 * int(keep.sum())
        if n_accepted + n_pending > max_intervals:
            best = neumaier_sum(np.concatenate(accepted_values + [(left_half + right_half)[keep]]))
            error = float(np.sum(np.concatenate(accepted_errors)) + np.sum(np.abs(delta[keep])))
            logger.warning(f"Adaptive Simpson budget of {max_intervals} intervals exhausted")
            raise AccuracyError(
                f"Adaptive Simpson could not reach tol={tol} within {max_intervals} subintervals",
                best_estimate=best, error_estimate=error, intervals=n_accepted + n_pending)

        left, mid, right = (
            np.concatenate((left[keep], mid[keep])),
            np.concatenate((left_mid[keep], right_mid[keep])),
            np.concatenate((mid[keep], right[keep])),
        )
        f_left, f_mid, f_right = (
            np.concatenate((f_left[keep], f_mid[keep])),
            np.concatenate((f_left_mid[keep], f_right_mid[keep])),
            np.concatenate((f_mid[keep], f_right[keep])),
        )
        whole = np.concatenate((left_half[keep], right_half[keep]))

    value = neumaier_sum(np.concatenate(accepted_values))
    error = float(np.sum(np.concatenate(accepted_errors)))
    return QuadratureResult(value, error, n_accepted)
