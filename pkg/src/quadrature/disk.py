"""
Vector-Valued Disk Quadrature

Brute-force evaluation of pi^{-1} int_{|alpha| <= r} |alpha><alpha|v> d^2 alpha
as a midpoint Riemann sum on a polar grid. It shares nothing with the closed
diagonal form except the coherent-state coefficients, so it serves as the
oracle for it, and it carries the numerical checks behind the vector-integral
machinery: triangle inequality, Bochner-type norm integrability, a bra moved
through the integral, and integral/sum exchange.

Cells are indexed radial-major. Angular sums within a ring are matrix
products; rings are accumulated in order with compensated summation per
Fock mode, so results are reproducible for a fixed grid.
"""

import logging
import math
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..core.errors import RejectedInputError
from ..core.fock import FockVector, inner, norm
from ..core.special import log_factorial
from ..core.summation import ComplexNeumaierAccumulator, complex_neumaier_sum, neumaier_sum
from ..operators.resolution import TruncatedResolution, apply

logger = logging.getLogger(__name__)

DEFAULT_GRID = "256x256"

_GRID_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


@dataclass(frozen=True)
class DiskGrid:
    """Polar midpoint grid over D(r): n_radial rings times n_angular sectors."""

    radius: float
    n_radial: int
    n_angular: int

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise RejectedInputError(f"Grid radius must be finite and positive, got {self.radius}")
        if self.n_radial < 2:
            raise RejectedInputError(f"n_radial must be at least 2, got {self.n_radial}")
        if self.n_angular < 4:
            raise RejectedInputError(f"n_angular must be at least 4, got {self.n_angular}")

    @classmethod
    def parse(cls, radius: float, spec: str = DEFAULT_GRID) -> "DiskGrid":
        """Build from a 'KxL' spec: K radial rings, L angular sectors."""
        match = _GRID_PATTERN.match(spec)
        if not match:
            raise RejectedInputError(f"Grid spec must look like 256x256, got {spec!r}")
        return cls(float(radius), int(match.group(1)), int(match.group(2)))

    @property
    def label(self) -> str:
        return f"{self.n_radial}x{self.n_angular}"

    @property
    def radial_step(self) -> float:
        return self.radius / self.n_radial

    @property
    def angular_step(self) -> float:
        return 2.0 * math.pi / self.n_angular

    @property
    def radial_nodes(self) -> np.ndarray:
        """Ring midpoints s_j = (j + 1/2) ds."""
        return (np.arange(self.n_radial) + 0.5) * self.radial_step

    @property
    def angular_nodes(self) -> np.ndarray:
        """Sector centers theta_k = k dtheta."""
        return np.arange(self.n_angular) * self.angular_step

    @property
    def cell_weights(self) -> np.ndarray:
        """mu(cell) = s_j ds dtheta, one value per ring."""
        return self.radial_nodes * self.radial_step * self.angular_step

    def total_weight(self) -> float:
        return neumaier_sum(self.cell_weights) * self.n_angular

    def refined(self) -> "DiskGrid":
        """Both steps halved."""
        return DiskGrid(self.radius, 2 * self.n_radial, 2 * self.n_angular)


class _Sampling:
    """Coherent-state coefficients at every grid node, split into ring and phase factors."""

    def __init__(self, grid: DiskGrid, dim: int):
        n = np.arange(dim)
        s = grid.radial_nodes
        # c_n(s e^{i theta}) = radial[j, n] * phase[k, n]
        self.radial = np.exp(-0.5 * s[:, None] ** 2 + np.log(s)[:, None] * n[None, :]
                             - 0.5 * log_factorial(n)[None, :])
        self.phase = np.exp(1j * np.outer(grid.angular_nodes, n))
        self.weights = grid.cell_weights

    def overlaps(self, v: FockVector) -> np.ndarray:
        """<alpha_jk|v> for every cell, shape (n_radial, n_angular)."""
        return (self.radial * v.coeffs[None, :]) @ np.conj(self.phase).T

    def node_norms(self) -> np.ndarray:
        """||c(alpha)|| of the truncated coherent vector, per ring."""
        return np.sqrt(np.sum(self.radial * self.radial, axis=1))


def _common_dim(*vectors: FockVector) -> int:
    return max(v.dim for v in vectors)


def quad_resolution(v: FockVector, grid: DiskGrid) -> FockVector:
    """pi^{-1} sum over cells of c(alpha) <alpha|v> mu(cell)."""
    sampling = _Sampling(grid, v.dim)
    overlap = sampling.overlaps(v)
    ring_sums = sampling.radial * (overlap @ sampling.phase) * sampling.weights[:, None]
    accumulator = ComplexNeumaierAccumulator((v.dim,))
    for ring in ring_sums:
        accumulator.add(ring)
    return FockVector(accumulator.value / math.pi)


def angular_orthogonality(n: int, m: int, n_angular: int) -> complex:
    """(1/2pi) dtheta sum_k e^{i(n-m) theta_k}: delta_{nm} unless n_angular divides n - m."""
    if n_angular < 1:
        raise RejectedInputError(f"n_angular must be positive, got {n_angular}")
    k = np.arange(n_angular)
    # reduce the exponent mod n_angular so the phases are exact roots of unity
    shift = (n - m) % n_angular
    return complex_neumaier_sum(np.exp(2j * math.pi * shift * k / n_angular)) / n_angular


@dataclass(frozen=True)
class TriangleCheck:
    lhs: float          # || sum integrand * mu ||
    rhs: float          # sum ||integrand|| * mu
    area_bound: float   # pi r^2 ||v||

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + 1e-12 and self.rhs <= self.area_bound + 1e-12


def triangle_check(v: FockVector, grid: DiskGrid) -> TriangleCheck:
    """Norm of the vector integral against the integral of the norm."""
    sampling = _Sampling(grid, v.dim)
    overlap = sampling.overlaps(v)
    lhs = math.pi * norm(quad_resolution(v, grid))
    ring_norms = sampling.weights * sampling.node_norms() * np.sum(np.abs(overlap), axis=1)
    rhs = neumaier_sum(ring_norms)
    return TriangleCheck(lhs, rhs, grid.total_weight() * norm(v))


@dataclass(frozen=True)
class IntegrabilityCheck:
    norm_integral: float          # sum ||f_alpha|| mu
    squared_norm_integral: float  # sum ||f_alpha||^2 mu
    norm_bound: float             # pi r^2 ||v||
    squared_bound: float          # pi r^2 ||v||^2

    @property
    def passed(self) -> bool:
        return (math.isfinite(self.norm_integral) and math.isfinite(self.squared_norm_integral)
                and self.norm_integral <= self.norm_bound + 1e-12
                and self.squared_norm_integral <= self.squared_bound + 1e-12)


def bochner_integrability_check(v: FockVector, grid: DiskGrid) -> IntegrabilityCheck:
    """Riemann sums of ||f_alpha|| and ||f_alpha||^2 for f_alpha = |alpha><alpha|v>."""
    sampling = _Sampling(grid, v.dim)
    magnitudes = np.abs(sampling.overlaps(v)) * sampling.node_norms()[:, None]
    weights = sampling.weights
    area = grid.total_weight()
    norm_v = norm(v)
    return IntegrabilityCheck(
        norm_integral=neumaier_sum(weights * np.sum(magnitudes, axis=1)),
        squared_norm_integral=neumaier_sum(weights * np.sum(magnitudes ** 2, axis=1)),
        norm_bound=area * norm_v,
        squared_bound=area * norm_v * norm_v,
    )


def bra_exchange_check(f: FockVector, v: FockVector, grid: DiskGrid) -> float:
    """|<f|quad(v)> - pi^{-1} sum_cells <f|alpha><alpha|v> mu|: the bra moved inside the sum."""
    dim = _common_dim(f, v)
    f, v = f.padded(dim), v.padded(dim)
    sampling = _Sampling(grid, dim)
    outside = inner(f, quad_resolution(v, grid))
    bra_values = (sampling.radial * np.conj(f.coeffs)[None, :]) @ sampling.phase.T
    cell_values = bra_values * sampling.overlaps(v)
    ring_values = sampling.weights * np.sum(cell_values, axis=1)
    inside = complex_neumaier_sum(ring_values) / math.pi
    return abs(outside - inside)


def termwise_exchange_check(v: FockVector, grid: DiskGrid) -> float:
    """|| quad(v) - w || where each mode w_n is integrated on its own over all cells."""
    sampling = _Sampling(grid, v.dim)
    overlap = sampling.overlaps(v) * sampling.weights[:, None]
    termwise = np.empty(v.dim, dtype=complex)
    for n in range(v.dim):
        cells = sampling.radial[:, n, None] * sampling.phase[None, :, n] * overlap
        # numpy's pairwise reduction: a second, independent accumulation order
        termwise[n] = np.sum(cells) / math.pi
    return float(np.linalg.norm(quad_resolution(v, grid).coeffs - termwise))


@dataclass(frozen=True)
class QuadratureComparison:
    grid: str
    radius: float
    error_vs_analytic: float
    triangle_lhs: float
    triangle_rhs: float
    bra_exchange_residual: float
    termwise_exchange_residual: float


QUADRATURE_COLUMNS = ("grid", "radius", "error_vs_analytic", "triangle_lhs", "triangle_rhs",
                      "bra_exchange_residual", "termwise_exchange_residual")


def analytic_error(v: FockVector, grid: DiskGrid) -> float:
    """|| quad(v) - A_r v || against the closed diagonal form."""
    res = TruncatedResolution.at_radius(grid.radius, v.dim)
    difference = quad_resolution(v, grid).coeffs - apply(res, v).coeffs
    return float(math.sqrt(neumaier_sum(np.abs(difference) ** 2)))


def compare_with_closed_form(v: FockVector, grid: DiskGrid,
                             bra: Optional[FockVector] = None) -> QuadratureComparison:
    """All oracle and vector-integral residuals for one grid."""
    triangle = triangle_check(v, grid)
    comparison = QuadratureComparison(
        grid=grid.label,
        radius=grid.radius,
        error_vs_analytic=analytic_error(v, grid),
        triangle_lhs=triangle.lhs,
        triangle_rhs=triangle.rhs,
        bra_exchange_residual=bra_exchange_check(bra if bra is not None else v, v, grid),
        termwise_exchange_residual=termwise_exchange_check(v, grid),
    )
    logger.debug(f"Quadrature {grid.label} at r={grid.radius}: error {comparison.error_vs_analytic!r}")
    return comparison


@dataclass(frozen=True)
class RefinementRow:
    grid: str
    error_vs_analytic: float
    ratio: Optional[float]  # previous error / this error


def refinement_study(v: FockVector, radius: float, grids: Sequence[str]) -> List[RefinementRow]:
    """Oracle error along a sequence of grids (typically dyadic refinement)."""
    rows: List[RefinementRow] = []
    previous: Optional[float] = None
    for spec in grids:
        grid = DiskGrid.parse(radius, spec)
        error = analytic_error(v, grid)
        ratio = previous / error if previous is not None and error > 0.0 else None
        rows.append(RefinementRow(grid.label, error, ratio))
        previous = error
    return rows
