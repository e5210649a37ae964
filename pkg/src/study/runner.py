"""
Study runner and subcommand pipelines.

Each pipeline turns validated inputs into a rendered report plus a pass/fail
flag; main.py maps subcommands onto these and handles output and exit codes.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..core.fock import FockVector
from ..core.gamma_kernel import gamma_table
from ..operators.diagnostics import (
    CONVERGENCE_COLUMNS,
    ConvergenceReport,
    DiagnosticCheck,
    KlauderReport,
    build_convergence_report,
    klauder_diagnostics,
    norm_witness,
    paper_tail_bound_check,
    witness_horizon,
)
from ..operators.resolution import TruncatedResolution, apply, select_radius, strong_error
from ..quadrature.disk import QUADRATURE_COLUMNS, DiskGrid, QuadratureComparison, compare_with_closed_form
from .config import StudyConfig
from .reporting import header_block, records, render
from .vectors import parse_vector_spec, vector_label

logger = logging.getLogger(__name__)

# bra and termwise exchange only reorder finite sums
EXCHANGE_TOLERANCE = 1e-10


@dataclass
class CommandOutput:
    """Rendered report text and whether every enabled assertion passed."""

    text: str
    passed: bool = True
    checks: List[DiagnosticCheck] = field(default_factory=list)


@dataclass
class StudyResult:
    config: StudyConfig
    report: ConvergenceReport
    klauder: KlauderReport
    quadrature: List[QuadratureComparison] = field(default_factory=list)
    checks: List[DiagnosticCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def residuals_hold(comparison: QuadratureComparison) -> bool:
    """Triangle inequality and both exchange identities on one grid."""
    return (comparison.triangle_lhs <= comparison.triangle_rhs + 1e-12
            and comparison.bra_exchange_residual <= EXCHANGE_TOLERANCE
            and comparison.termwise_exchange_residual <= EXCHANGE_TOLERANCE)


def random_bra(dim: int, seed: int) -> FockVector:
    """Seeded complex Gaussian unit vector."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return FockVector(coeffs / np.linalg.norm(coeffs))


def run_study(cfg: StudyConfig, base_dir: Optional[str] = None) -> StudyResult:
    """Radius sweep, Klauder diagnostics and (optionally) quadrature comparison."""
    v = parse_vector_spec(cfg.vector, cfg.dim, base_dir)
    label = vector_label(cfg.vector)
    radii = cfg.resolved_radii()
    logger.info(f"Running study for {label}, dim={cfg.dim}, {len(radii)} radii")

    report = build_convergence_report(v, radii, label=label, max_m=cfg.max_m, workers=cfg.workers)
    klauder = klauder_diagnostics(v, radii, label=label)
    result = StudyResult(cfg, report, klauder)
    result.checks.extend(klauder.checks)

    if cfg.quadrature:
        bra = random_bra(cfg.dim, cfg.seed)
        for radius in radii:
            grid = DiskGrid.parse(radius, cfg.grid)
            comparison = compare_with_closed_form(v, grid, bra)
            result.quadrature.append(comparison)
            result.checks.append(DiagnosticCheck(
                f"quadrature residuals r={radius!r}", residuals_hold(comparison),
                f"error_vs_analytic={comparison.error_vs_analytic!r}"))

    if not result.passed:
        logger.warning(f"Study for {label}: {sum(not c.passed for c in result.checks)} checks failed")
    return result


def _study_header(cfg: StudyConfig) -> Dict[str, Any]:
    # the output path only says where the bytes go, so it stays out of them
    settings = cfg.model_dump(mode="json", exclude={"output"})
    settings["output_format"] = cfg.output.format
    settings["radii"] = cfg.resolved_radii()
    settings["test_vector_label"] = vector_label(cfg.vector)
    return header_block("converge", settings)


def render_study(result: StudyResult) -> str:
    sections = {"convergence": (CONVERGENCE_COLUMNS, records(result.report.rows, CONVERGENCE_COLUMNS))}
    if result.quadrature:
        sections["quadrature"] = (QUADRATURE_COLUMNS, records(result.quadrature, QUADRATURE_COLUMNS))
    return render(result.config.output.format, _study_header(result.config), sections)


def converge_command(cfg: StudyConfig, base_dir: Optional[str] = None) -> CommandOutput:
    result = run_study(cfg, base_dir)
    return CommandOutput(render_study(result), result.passed, result.checks)


def gamma_table_command(radius_sq: float, max_n: int, fmt: str = "csv") -> CommandOutput:
    table = gamma_table(radius_sq, max_n)
    residuals = np.concatenate(([0.0], table.recurrence_residuals()))
    rows = [(n, table.I[n], table.Q[n], residuals[n]) for n in range(table.max_n + 1)]
    violations = table.property_violations()
    header = header_block("gamma-table", {"radius_sq": radius_sq, "max_n": max_n})
    text = render(fmt, header, {"table": (("n", "I", "Q", "recurrence_residual"), rows)})
    checks = [DiagnosticCheck(name, False) for name in violations]
    return CommandOutput(text, not violations, checks)


def resolve_command(vector: str, dim: int, radius: float, fmt: str = "csv") -> CommandOutput:
    v = parse_vector_spec(vector, dim)
    res = TruncatedResolution.at_radius(radius, dim)
    Av = apply(res, v)
    error = strong_error(res, v)
    rows = [
        (n, v.coeffs[n].real, v.coeffs[n].imag, Av.coeffs[n].real, Av.coeffs[n].imag,
         res.diagonal[n], res.complement[n])
        for n in range(dim)
    ]
    header = header_block("resolve", {"vector": vector, "dim": dim, "radius": radius,
                                      "strong_error": error})
    columns = ("n", "input_re", "input_im", "output_re", "output_im", "eigenvalue", "complement")
    return CommandOutput(render(fmt, header, {"modes": (columns, rows)}))


def select_radius_command(vector: str, dim: int, eps: float, fmt: str = "csv",
                          bisection_steps: int = 40) -> CommandOutput:
    v = parse_vector_spec(vector, dim)
    radius = select_radius(v, eps, bisection_steps)
    error = strong_error(TruncatedResolution.at_radius(radius, dim), v)
    passed = error < eps
    header = header_block("select-radius", {"vector": vector, "dim": dim, "eps": eps})
    rows = [(eps, radius, error, passed)]
    text = render(fmt, header, {"selection": (("eps", "radius", "strong_error", "postcondition"), rows)})
    return CommandOutput(text, passed, [DiagnosticCheck("strong_error < eps", passed)])


def norm_witness_command(radius: float, max_m: Optional[int] = None,
                         fmt: str = "csv") -> CommandOutput:
    horizon = witness_horizon(radius) if max_m is None else max_m
    res = TruncatedResolution.at_radius(radius, horizon + 1)
    witness = norm_witness(res, horizon)
    tail = paper_tail_bound_check(radius, range(horizon + 1))
    checks = [
        DiagnosticCheck("witness^2 >= tail-derived bound", witness.squared_bound_holds),
        DiagnosticCheck("<m|A|m> <= 2 r^(2m+2)/m!", tail.passed),
    ]
    header = header_block("norm-witness", {"radius": radius, "max_m": horizon})
    rows = [(radius, witness.m, witness.witness, witness.paper_bound)]
    text = render(fmt, header, {"witness": (("radius", "m", "witness", "paper_bound"), rows)})
    return CommandOutput(text, all(c.passed for c in checks), checks)


def quadrature_compare_command(vector: str, dim: int, radius: float, grid: str,
                               seed: int = 0, fmt: str = "csv") -> CommandOutput:
    v = parse_vector_spec(vector, dim)
    disk = DiskGrid.parse(radius, grid)
    comparison = compare_with_closed_form(v, disk, random_bra(dim, seed))
    passed = residuals_hold(comparison)
    header = header_block("quadrature-compare", {"vector": vector, "dim": dim, "radius": radius,
                                                 "grid": disk.label, "seed": seed})
    text = render(fmt, header, {"quadrature": (QUADRATURE_COLUMNS, records([comparison], QUADRATURE_COLUMNS))})
    return CommandOutput(text, passed, [DiagnosticCheck("quadrature residuals", passed)])

