"""
Acceptance suite behind the `check` subcommand.

Eight groups, each returning DiagnosticCheck records: gamma kernel, strong
convergence, radius selection, Klauder lift, no uniform limit, quadrature
oracle, the vector-integral checks, and the remaining per-module invariants.
Randomized groups draw from one seeded generator so a fixed seed gives a
fixed report.
"""

import logging
import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..core.fock import FockVector, coherent_coefficients, inner, norm
from ..core.gamma_kernel import gamma_limit_check, gamma_oracle, gamma_table
from ..operators.diagnostics import (
    DiagnosticCheck,
    diagonal_element_oracle,
    klauder_diagnostics,
    norm_witness,
    paper_tail_bound_check,
    projection_resolution_compare,
    witness_horizon,
)
from ..operators.resolution import TruncatedResolution, select_radius, strong_error, weak_defect
from ..quadrature.disk import (
    DiskGrid,
    analytic_error,
    angular_orthogonality,
    bochner_integrability_check,
    bra_exchange_check,
    quad_resolution,
    refinement_study,
    termwise_exchange_check,
    triangle_check,
)
from .vectors import parse_vector_spec

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ("suite", "name", "passed", "detail")

SUITE_RADII = (1.0, 2.0, 4.0, 8.0)
SUITE_DIM = 64
SUITE_VECTORS = ("fock 0", "fock 5", "coherent 1,0", "coherent 2,0", "geometric 0.5")
SLOW_TAIL_VECTOR = "geometric 0.5"

Suite = Callable[[np.random.Generator], List[DiagnosticCheck]]


def _random_unit_vector(rng: np.random.Generator, dim: int) -> FockVector:
    coeffs = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return FockVector(coeffs / np.linalg.norm(coeffs))


def _suite_vectors() -> Dict[str, FockVector]:
    return {spec: parse_vector_spec(spec, SUITE_DIM) for spec in SUITE_VECTORS}


def gamma_kernel_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    checks = []
    value = gamma_table(1.0, 0).I[0]
    expected = -math.expm1(-1.0)
    checks.append(DiagnosticCheck("I_0(1) = 1 - 1/e", abs(value - expected) <= 1e-12,
                                  f"{value!r} vs {expected!r}"))

    worst = 0.0
    violations: List[str] = []
    for radius_sq in (1e-3, 0.5, 1.0, 10.0, 50.0, 100.0, 200.0, 400.0):
        table = gamma_table(radius_sq, 200)
        worst = max(worst, float(np.max(table.recurrence_residuals())))
        violations.extend(f"R={radius_sq!r}: {v}" for v in table.property_violations())
    checks.append(DiagnosticCheck("recurrence residual <= 1e-12 (n <= 200, R <= 400)",
                                  worst <= 1e-12, f"worst={worst!r}"))
    checks.append(DiagnosticCheck("table properties", not violations, "; ".join(violations)))

    worst = 0.0
    worst_pair: Tuple[int, float] = (0, 0.0)
    for _ in range(500):
        n = int(rng.integers(0, 201))
        radius_sq = float(rng.uniform(0.0, 100.0))
        difference = abs(gamma_table(radius_sq, n).I[n] - gamma_oracle(radius_sq, n))
        if difference > worst:
            worst, worst_pair = difference, (n, radius_sq)
    checks.append(DiagnosticCheck("table vs quadrature oracle on 500 pairs", worst <= 1e-10,
                                  f"worst={worst!r} at (n, R)={worst_pair!r}"))
    return checks


def strong_convergence_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    checks = []
    for spec, v in _suite_vectors().items():
        errors = [strong_error(TruncatedResolution.at_radius(r, SUITE_DIM), v) for r in SUITE_RADII]
        monotone = all(b <= a for a, b in zip(errors, errors[1:]))
        checks.append(DiagnosticCheck(f"{spec}: strong error nonincreasing", monotone, repr(errors)))
        if spec == SLOW_TAIL_VECTOR:
            radius = select_radius(v, 1e-3)
            error = strong_error(TruncatedResolution.at_radius(radius, SUITE_DIM), v)
            checks.append(DiagnosticCheck(f"{spec}: select_radius(1e-3) postcondition", error < 1e-3,
                                          f"radius={radius!r} error={error!r}"))
        else:
            checks.append(DiagnosticCheck(f"{spec}: strong error < 1e-8 at r=8", errors[-1] < 1e-8,
                                          repr(errors[-1])))
    return checks


def radius_selection_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    failures = []
    for trial in range(100):
        v = _random_unit_vector(rng, int(rng.integers(1, 129)))
        for eps in (1e-1, 1e-2, 1e-3):
            radius = select_radius(v, eps)
            error = strong_error(TruncatedResolution.at_radius(radius, v.dim), v)
            if not error < eps:
                failures.append(f"trial {trial} dim {v.dim} eps {eps!r}: {error!r}")
    return [DiagnosticCheck("select_radius on 100 random vectors x 3 eps", not failures,
                            "; ".join(failures[:5]))]


def klauder_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    checks = []
    for spec, v in _suite_vectors().items():
        report = klauder_diagnostics(v, SUITE_RADII, label=spec)
        failed = [check.name for check in report.checks if not check.passed]
        checks.append(DiagnosticCheck(f"{spec}: Klauder properties", not failed, "; ".join(failed)))
        ratio = report.rows[-1].norm_ratio
        checks.append(DiagnosticCheck(f"{spec}: ||A_8 v|| / ||v|| > 1 - 1e-6", ratio > 1.0 - 1e-6,
                                      repr(ratio)))
    return checks


def uniform_limit_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    checks = []
    for r in SUITE_RADII:
        horizon = witness_horizon(r)
        witness = norm_witness(TruncatedResolution.at_radius(r, horizon + 1), horizon)
        checks.append(DiagnosticCheck(f"r={r!r}: norm witness > 0.99", witness.witness > 0.99,
                                      f"m={witness.m} Q={witness.witness!r}"))
        checks.append(DiagnosticCheck(f"r={r!r}: witness^2 >= tail-derived bound", witness.squared_bound_holds))
        tail = paper_tail_bound_check(r, range(horizon + 1))
        checks.append(DiagnosticCheck(f"r={r!r}: <m|A_r|m> <= 2 r^(2m+2)/m!", tail.passed))

    comparison = projection_resolution_compare(parse_vector_spec("coherent 1,0", SUITE_DIM), range(21))
    failed = [check.name for check in comparison.checks if not check.passed]
    checks.append(DiagnosticCheck("head projections: witnesses exactly 1", not failed, "; ".join(failed)))
    return checks


def quadrature_oracle_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    checks = []
    v = parse_vector_spec("coherent 1,0", 40)
    error = analytic_error(v, DiskGrid.parse(4.0, "512x512"))
    checks.append(DiagnosticCheck("r=4 dim 40 512x512 oracle error <= 5e-4", error <= 5e-4, repr(error)))

    rows = refinement_study(v, 4.0, ("64x64", "128x128", "256x256", "512x512"))
    ratios = [row.ratio for row in rows[1:]]
    checks.append(DiagnosticCheck("dyadic refinement ratios >= 3",
                                  all(ratio is not None and ratio >= 3.0 for ratio in ratios),
                                  repr(ratios)))

    mode0 = quad_resolution(FockVector.basis(0, 4), DiskGrid.parse(4.0, "2048x16")).coeffs[0]
    expected = -math.expm1(-16.0)
    checks.append(DiagnosticCheck("e_0 mode-0 value within 1e-6 of 1 - e^-16",
                                  abs(mode0 - expected) <= 1e-6, repr(mode0)))
    return checks


def vector_integral_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    failures = []
    for case in range(50):
        dim = int(rng.integers(1, 33))
        f, v = _random_unit_vector(rng, dim), _random_unit_vector(rng, dim)
        grid = DiskGrid(float(rng.uniform(0.5, 4.0)), 64, 64)
        triangle = triangle_check(v, grid)
        integrability = bochner_integrability_check(v, grid)
        bra = bra_exchange_check(f, v, grid)
        termwise = termwise_exchange_check(v, grid)
        if not (triangle.passed and integrability.passed and bra <= 1e-10 and termwise <= 1e-10):
            failures.append(f"case {case} dim {dim} r={grid.radius!r}: bra={bra!r} termwise={termwise!r}")
    checks = [DiagnosticCheck("triangle, integrability and exchange on 50 random cases",
                              not failures, "; ".join(failures[:5]))]

    worst = 0.0
    for n_angular in range(4, 41):
        for n in range(16):
            for m in range(16):
                if n_angular > n + m:
                    value = angular_orthogonality(n, m, n_angular)
                    worst = max(worst, abs(value - (1.0 if n == m else 0.0)))
    checks.append(DiagnosticCheck("angular orthogonality exact to 1e-14", worst <= 1e-14, repr(worst)))
    aliased = angular_orthogonality(0, 8, 8)
    checks.append(DiagnosticCheck("angular aliasing value 1", abs(aliased - 1.0) <= 1e-14, repr(aliased)))
    return checks


ORACLE_PAIRS = ((0, 1.0), (1, 0.5), (4, 1.0), (10, 3.0), (25, 5.0), (60, 9.0))


def _fock_invariants(rng: np.random.Generator) -> List[DiagnosticCheck]:
    failures = []
    for case in range(50):
        dim = int(rng.integers(1, 33))
        x, y, z = (_random_unit_vector(rng, dim) for _ in range(3))
        c = complex(*rng.uniform(-3.0, 3.0, size=2))
        scale = 1.0 + abs(c)
        if abs(inner(x, y) - inner(y, x).conjugate()) > 1e-12:
            failures.append(f"case {case}: conjugate symmetry")
        combined = FockVector(c * y.coeffs + z.coeffs)
        if abs(inner(x, combined) - (c * inner(x, y) + inner(x, z))) > 1e-12 * scale:
            failures.append(f"case {case}: linear in the second slot")
        if abs(inner(FockVector(c * x.coeffs), y) - c.conjugate() * inner(x, y)) > 1e-12 * scale:
            failures.append(f"case {case}: conjugate linear in the first slot")
        if abs(inner(x, y)) > norm(x) * norm(y) * (1.0 + 1e-12):
            failures.append(f"case {case}: Cauchy-Schwarz")
    checks = [DiagnosticCheck("inner product axioms on 50 random triples", not failures,
                              "; ".join(failures[:5]))]

    failures = []
    for case in range(50):
        alpha = complex(*rng.uniform(-4.0, 4.0, size=2))
        dim = int(rng.integers(1, 201))
        norm_sq = coherent_coefficients(alpha, dim).norm_sq()
        expected = gamma_table(abs(alpha) ** 2, dim - 1).Q[dim - 1]
        if norm_sq > 1.0 or abs(norm_sq - expected) > 1e-10:
            failures.append(f"alpha={alpha!r} dim={dim}: {norm_sq!r} vs Q={expected!r}")
    checks.append(DiagnosticCheck("||coherent(alpha, N)||^2 = Q_N(|alpha|^2) <= 1", not failures,
                                  "; ".join(failures[:5])))
    return checks


def _kernel_invariants() -> List[DiagnosticCheck]:
    worst = max(abs(diagonal_element_oracle(m, r) - gamma_table(r * r, m).I[m]) for m, r in ORACLE_PAIRS)
    checks = [DiagnosticCheck("<m|A_r|m> radial integral vs I_m(r^2)", worst <= 1e-10, f"worst={worst!r}")]

    values = gamma_limit_check(0, [1.0, 2.0, 4.0])
    expected = -np.expm1(-np.array([1.0, 2.0, 4.0]))
    checks.append(DiagnosticCheck("I_0(R) = 1 - e^-R along R = 1, 2, 4",
                                  bool(np.max(np.abs(values - expected)) <= 1e-14), repr(list(values))))
    values = gamma_limit_check(5, [5.0, 10.0, 20.0, 40.0])
    checks.append(DiagnosticCheck("I_5(R) increases towards 1",
                                  bool(np.all(np.diff(values) > 0.0)) and values[-1] > 0.9999,
                                  repr(list(values))))

    arguments = (0.5, 1.0, 3.0, 7.0, 15.0, 40.0, 100.0)
    failures = []
    for n in (0, 3, 7, 20):
        row = [gamma_table(R, n).I[n] for R in arguments]
        if any(b < a for a, b in zip(row, row[1:])):
            failures.append(f"n={n}: {row!r}")
    checks.append(DiagnosticCheck("I_n nondecreasing in R", not failures, "; ".join(failures)))
    return checks


def _operator_invariants() -> List[DiagnosticCheck]:
    failures = []
    for radius in (0.5, 2.0, 6.0):
        res = TruncatedResolution.at_radius(radius, 8)
        for m in range(8):
            for n in range(8):
                if m != n and weak_defect(res, FockVector.basis(m, 8), FockVector.basis(n, 8)) != 0.0:
                    failures.append(f"r={radius!r} ({m}, {n})")
    checks = [DiagnosticCheck("weak defect zero off the diagonal", not failures, "; ".join(failures[:5]))]

    dim = 8
    grid = DiskGrid(2.5, 128, 2 * dim + 1)
    worst = 0.0
    for m in (0, 3, 7):
        coeffs = quad_resolution(FockVector.basis(m, dim), grid).coeffs
        worst = max(worst, float(np.max(np.abs(np.delete(coeffs, m)))))
    checks.append(DiagnosticCheck("quad(e_m) supported on mode m to 1e-13", worst <= 1e-13, repr(worst)))
    return checks


def module_invariants_suite(rng: np.random.Generator) -> List[DiagnosticCheck]:
    """Per-module invariants the acceptance groups do not already cover."""
    return _fock_invariants(rng) + _kernel_invariants() + _operator_invariants()


SUITES: Sequence[Tuple[str, Suite]] = (
    ("gamma-kernel", gamma_kernel_suite),
    ("strong-convergence", strong_convergence_suite),
    ("radius-selection", radius_selection_suite),
    ("klauder-lift", klauder_suite),
    ("no-uniform-limit", uniform_limit_suite),
    ("quadrature-oracle", quadrature_oracle_suite),
    ("vector-integrals", vector_integral_suite),
    ("module-invariants", module_invariants_suite),
)


def run_check_suite(seed: int = 0) -> List[Tuple[str, DiagnosticCheck]]:
    """Every suite in order, each with its own generator derived from seed."""
    results = []
    for index, (suite_name, suite) in enumerate(SUITES):
        rng = np.random.default_rng([seed, index])
        logger.info(f"Running suite {suite_name}")
        checks = suite(rng)
        failed = sum(not check.passed for check in checks)
        if failed:
            logger.warning(f"Suite {suite_name}: {failed} of {len(checks)} checks failed")
        results.extend((suite_name, check) for check in checks)
    logger.info(f"Check suite finished: {sum(c.passed for _, c in results)}/{len(results)} passed")
    return results
