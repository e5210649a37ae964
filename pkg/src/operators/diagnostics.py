"""
Convergence Diagnostics for the Truncated Resolution

Numerical restatements of the three convergence facts about A_r:

- strong convergence to I (per-vector error shrinks with r),
- the monotone-boundedness lift from weak to strong convergence
  (0 <= A_r <= I, A_r nondecreasing in r, ||A_r v|| -> ||v||),
- no uniform convergence (some basis vector keeps a defect near 1 for every r),
  compared with the head projections B_n = sum_{k<=n} |k><k|.

Diagnostics never raise on a failed property; they return DiagnosticCheck
records so callers can aggregate them.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import RejectedInputError
from ..core.fock import FockVector, inner, norm
from ..core.gamma_kernel import gamma_table
from ..core.integration import adaptive_simpson
from ..core.special import log_factorial
from ..core.summation import neumaier_sum
from .resolution import TruncatedResolution, apply, strong_error, weak_defect

logger = logging.getLogger(__name__)

# absolute slack on inequalities between quantities of order ||v||^2
CHECK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DiagnosticCheck:
    """Outcome of one property check."""

    name: str
    passed: bool
    detail: str = ""


def _check(checks: List[DiagnosticCheck], name: str, passed: bool, detail: str = "") -> None:
    checks.append(DiagnosticCheck(name, bool(passed), detail))
    if not passed:
        logger.warning(f"Check failed: {name} {detail}")


def _check_increasing(radii: Sequence[float]) -> List[float]:
    values = [float(r) for r in radii]
    if not values:
        raise RejectedInputError("At least one radius is required")
    if any(not math.isfinite(r) or r <= 0.0 for r in values):
        raise RejectedInputError("Radii must be finite and positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise RejectedInputError("Radii must be strictly increasing")
    return values


def witness_horizon(radius: float) -> int:
    """A mode index past which Q_m(r^2) is essentially 1."""
    radius_sq = radius * radius
    return max(8, int(math.ceil(radius_sq + 6.0 * radius + 10.0)))


# --- Klauder lift -----------------------------------------------------------

@dataclass(frozen=True)
class KlauderRow:
    radius: float
    expectation: float        # <v|A_r v>
    applied_norm: float       # ||A_r v||
    norm_ratio: float         # ||A_r v|| / ||v||
    strong_error: float
    expansion_residual: float  # | ||(I-A)v||^2 - (||v||^2 - 2Re<v|Av> + ||Av||^2) |


@dataclass
class KlauderReport:
    vector_label: str
    vector_norm: float
    rows: List[KlauderRow] = field(default_factory=list)
    checks: List[DiagnosticCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def klauder_diagnostics(v: FockVector, radii: Sequence[float], label: str = "") -> KlauderReport:
    """Check 0 <= A_r <= I, monotonicity in r, A_r >= A_r^2 and the trend ||A_r v|| -> ||v||."""
    radii = _check_increasing(radii)
    norm_v = norm(v)
    norm_sq = norm_v * norm_v
    slack = CHECK_TOLERANCE * max(1.0, norm_sq)
    report = KlauderReport(label, norm_v)
    checks = report.checks

    previous: Optional[KlauderRow] = None
    for r in radii:
        res = TruncatedResolution.at_radius(r, v.dim)
        Av = apply(res, v)
        overlap = inner(v, Av)
        expectation = overlap.real
        applied_norm = norm(Av)
        error = strong_error(res, v)
        expansion = norm_sq - 2.0 * expectation + applied_norm * applied_norm
        row = KlauderRow(
            radius=r,
            expectation=expectation,
            applied_norm=applied_norm,
            norm_ratio=applied_norm / norm_v if norm_v > 0.0 else 1.0,
            strong_error=error,
            expansion_residual=abs(error * error - expansion),
        )
        report.rows.append(row)

        tag = f"r={r!r}"
        _check(checks, f"positivity {tag}", expectation >= -slack, f"<v|Av>={expectation!r}")
        _check(checks, f"A <= I {tag}", expectation <= norm_sq + slack,
               f"<v|Av>={expectation!r} ||v||^2={norm_sq!r}")
        _check(checks, f"real expectation {tag}", abs(overlap.imag) <= slack,
               f"Im<v|Av>={overlap.imag!r}")
        _check(checks, f"contraction {tag}", applied_norm <= norm_v + slack,
               f"||Av||={applied_norm!r} ||v||={norm_v!r}")
        _check(checks, f"largest eigenvalue bound {tag}",
               applied_norm <= res.diagonal[0] * norm_v + slack,
               f"||Av||={applied_norm!r} I_0={res.diagonal[0]!r}")
        _check(checks, f"Schwarz {tag}", abs(overlap) <= norm_v * applied_norm + slack)
        diag = res.diagonal
        _check(checks, f"A >= A^2 {tag}", bool(np.all(diag >= diag * diag)))
        _check(checks, f"lift expansion {tag}", row.expansion_residual <= 1e-10 * max(1.0, norm_sq),
               f"residual={row.expansion_residual!r}")
        if previous is not None:
            _check(checks, f"monotone expectation {tag}", expectation >= previous.expectation - slack)
            _check(checks, f"monotone strong error {tag}", error <= previous.strong_error + slack)
        previous = row

    logger.debug(f"Klauder diagnostics for {label or v!r}: final ratio "
                 f"{report.rows[-1].norm_ratio!r}")
    return report


# --- Norm witness (no uniform limit) -----------------------------------------

@dataclass(frozen=True)
class NormWitness:
    """Best basis-vector lower bound on ||A_r - I|| among modes m <= max_m."""

    radius: float
    max_m: int
    m: int
    witness: float
    paper_bound: float

    @property
    def squared_bound_holds(self) -> bool:
        # the crude estimate 1 - 2<m|A|m> bounds the squared defect
        return self.witness * self.witness >= self.paper_bound - CHECK_TOLERANCE


def norm_witness(res: TruncatedResolution, max_m: int) -> NormWitness:
    """
    max_{m <= max_m} Q_m(r^2) = ||(A_r - I) e_m|| at its smallest maximizing m.

    Diagonality makes the basis-vector defect exact; it is a lower bound on the
    operator norm, which is never claimed as computed.
    """
    if int(max_m) != max_m or max_m < 0:
        raise RejectedInputError(f"max_m must be a nonnegative integer, got {max_m}")
    max_m = int(max_m)
    if max_m < res.dim:
        table = res.eigenvalues
    else:
        table = gamma_table(res.radius * res.radius, max_m)
    Q = table.Q[:max_m + 1]
    I = table.I[:max_m + 1]
    m_star = int(np.argmax(Q))
    paper_bound = max(0.0, float(np.max(1.0 - 2.0 * I)))
    return NormWitness(res.radius, max_m, m_star, float(Q[m_star]), paper_bound)


def diagonal_element_oracle(m: int, r: float, tol: float = 1e-12) -> float:
    """<m|A_r|m> as (2/m!) int_0^r s^{2m+1} e^{-s^2} ds by adaptive Simpson."""
    if int(m) != m or m < 0:
        raise RejectedInputError(f"m must be a nonnegative integer, got {m}")
    if not (math.isfinite(r) and r >= 0.0):
        raise RejectedInputError(f"r must be finite and nonnegative, got {r}")
    if r == 0.0:
        return 0.0
    log_scale = math.log(2.0) - log_factorial(int(m))

    def integrand(s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_s = np.log(s)
        return np.where(s > 0.0, np.exp(log_scale + (2 * m + 1) * log_s - s * s), 0.0)

    panels = max(4, int(math.ceil(r / 0.25)))
    breakpoints = list(np.linspace(0.0, r, panels + 1)[1:-1])
    peak = math.sqrt(m + 0.5)
    if peak < r:
        breakpoints.append(peak)
    return adaptive_simpson(integrand, 0.0, r, tol, breakpoints).value


# --- Tail bound --------------------------------------------------------------

@dataclass(frozen=True)
class TailBoundRow:
    m: int
    diagonal: float     # I_m(r^2) = <m|A_r|m>
    log_bound: float    # ln(2 r^{2m+2} / m!)
    holds: bool


@dataclass
class TailBoundReport:
    radius: float
    rows: List[TailBoundRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.holds for row in self.rows)


def paper_tail_bound_check(r: float, m_range: Iterable[int]) -> TailBoundReport:
    """Check <m|A_r|m> = I_m(r^2) <= 2 r^{2m+2} / m! with the bound kept in log space."""
    r = float(r)
    if not (math.isfinite(r) and r > 0.0):
        raise RejectedInputError(f"r must be finite and positive, got {r}")
    modes = sorted({int(m) for m in m_range})
    if not modes or modes[0] < 0:
        raise RejectedInputError("m_range must hold nonnegative mode indices")
    table = gamma_table(r * r, modes[-1])
    report = TailBoundReport(r)
    for m in modes:
        diagonal = float(table.I[m])
        log_bound = math.log(2.0) + (2 * m + 2) * math.log(r) - log_factorial(m)
        if log_bound >= 0.0:
            holds = diagonal <= 1.0  # RHS >= 1, still asserted
        elif diagonal == 0.0:
            holds = True
        else:
            holds = math.log(diagonal) <= log_bound
        report.rows.append(TailBoundRow(m, diagonal, log_bound, holds))
    return report


# --- Head projections B_n ----------------------------------------------------

@dataclass(frozen=True)
class ProjectionRow:
    n: int
    strong_error: float      # ||(B_n - I) v|| = sqrt(tail mass beyond n)
    direct_tail: float       # same, by direct summation of |v_k|^2, k > n
    basis_witness: float     # ||(B_n - I) e_{n+1}||


@dataclass
class ProjectionComparison:
    rows: List[ProjectionRow] = field(default_factory=list)
    pair_witnesses: List[Tuple[int, int, float]] = field(default_factory=list)
    checks: List[DiagnosticCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _head_projection(n: int, v: FockVector) -> FockVector:
    coeffs = np.array(v.coeffs)
    coeffs[n + 1:] = 0.0
    return FockVector(coeffs)


def projection_resolution_compare(v: FockVector, n_range: Iterable[int]) -> ProjectionComparison:
    """Strong error and basis-vector witnesses of the head projections B_n."""
    ns = sorted({int(n) for n in n_range})
    if ns and ns[0] < 0:
        raise RejectedInputError("n_range must hold nonnegative indices")
    tail = v.tail_mass()
    report = ProjectionComparison()
    for n in ns:
        error = math.sqrt(tail[n]) if n < v.dim else 0.0
        direct = math.sqrt(neumaier_sum(np.abs(v.coeffs[n + 1:]) ** 2))
        basis_vector = FockVector.basis(n + 1, n + 2)
        defect = basis_vector.coeffs - _head_projection(n, basis_vector).coeffs
        witness = float(np.linalg.norm(defect))
        report.rows.append(ProjectionRow(n, error, direct, witness))
        _check(report.checks, f"B_{n} tail identity", abs(error - direct) <= CHECK_TOLERANCE,
               f"{error!r} vs {direct!r}")
        _check(report.checks, f"B_{n} basis witness", witness == 1.0, f"{witness!r}")

    for i, n in enumerate(ns):
        for m in ns[i + 1:]:
            top = max(n, m)
            basis_vector = FockVector.basis(top, top + 1)
            difference = _head_projection(n, basis_vector).coeffs - _head_projection(m, basis_vector).coeffs
            witness = float(np.linalg.norm(difference))
            report.pair_witnesses.append((n, m, witness))
            _check(report.checks, f"||B_{n} - B_{m}|| witness", witness == 1.0, f"{witness!r}")
    return report


# --- Radius sweep --------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    radius: float
    strong_error: float
    weak_defect_self: float
    norm_witness: float
    paper_bound: float


CONVERGENCE_COLUMNS = ("radius", "strong_error", "weak_defect_self", "norm_witness", "paper_bound")


@dataclass
class ConvergenceReport:
    """Per-radius distances of A_r from I for one test vector."""

    test_vector_label: str
    rows: List[ConvergenceRow] = field(default_factory=list)

    def is_monotone(self) -> bool:
        errors = [row.strong_error for row in self.rows]
        return all(b <= a for a, b in zip(errors, errors[1:]))


def _convergence_row(v: FockVector, radius: float, max_m: Optional[int]) -> ConvergenceRow:
    res = TruncatedResolution.at_radius(radius, v.dim)
    witness = norm_witness(res, witness_horizon(radius) if max_m is None else max_m)
    return ConvergenceRow(
        radius=radius,
        strong_error=strong_error(res, v),
        weak_defect_self=weak_defect(res, v, v).real,
        norm_witness=witness.witness,
        paper_bound=witness.paper_bound,
    )


def build_convergence_report(v: FockVector, radii: Sequence[float], label: str = "",
                             max_m: Optional[int] = None, workers: int = 1) -> ConvergenceReport:
    """Sweep radii; rows come back in radius order whatever the worker count."""
    radii = _check_increasing(radii)
    logger.info(f"Convergence sweep over {len(radii)} radii for {label or repr(v)}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda r: _convergence_row(v, r, max_m), radii))
    else:
        rows = [_convergence_row(v, r, max_m) for r in radii]
    report = ConvergenceReport(label, rows)
    if not report.is_monotone():
        logger.warning(f"Strong error not monotone along the sweep for {label}")
    return report
