"""Sonine 伴随核

给定奇异核 M，求 K 使 M∗K ≡ 1。K 取单元上的分段常数，
M 的单元矩由一阶原函数精确给出：

    Σ_{j<n} K_j a_{n-1-j} = 1,   a_m = P1((m+1)h) - P1(mh)
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular, toeplitz

from src.core.kernels.memory_kernel import (
    DistributedOrderKernel,
    MemoryKernel,
    PowerLawKernel,
    TabulatedKernel,
    TemperedKernel,
)
from src.infrastructure.errors.exceptions import (
    IllConditionedError,
    PreconditionError,
    UnsupportedVariantError,
)
from src.infrastructure.logging.logger import get_logger
from src.models.entities import TimeGrid
from src.utils.numerics import FloatArray

_PIVOT_GUARD = 1e-300


@dataclass(frozen=True)
class SoninePartner:
    """Sonine 伴随核：单元值、单元中点上的表格核与离散残差"""

    grid: TimeGrid
    cell_values: FloatArray
    kernel: TabulatedKernel
    residual: float


def sonine_moments(kernel: MemoryKernel, grid: TimeGrid) -> FloatArray:
    """单元矩 a_m = ∫_{mh}^{(m+1)h} M，m = 0..N-1"""
    p1 = np.asarray(kernel.primitive(grid.times), dtype=float)
    return np.diff(p1)


def sonine_partner(kernel: MemoryKernel, grid: TimeGrid) -> SoninePartner:
    """求解下三角 Toeplitz 第一类系统得到 K"""
    supported = isinstance(kernel, (PowerLawKernel, TemperedKernel)) or (
        isinstance(kernel, DistributedOrderKernel) and kernel.singular_at_origin
    )
    if not supported:
        raise PreconditionError(
            f"Sonine 伴随核要求 M 在 0 处可积奇异, {kernel.family} 不满足"
        )
    moments = sonine_moments(kernel, grid)
    if abs(moments[0]) < _PIVOT_GUARD:
        raise IllConditionedError(
            "Sonine 系统的对角元为零", {"a0": float(moments[0]), "h": grid.h}
        )
    matrix = toeplitz(moments, np.zeros_like(moments))
    rhs = np.ones(grid.N)
    cell_values = solve_triangular(matrix, rhs, lower=True, check_finite=False)
    if not np.all(np.isfinite(cell_values)) or np.any(cell_values <= 0.0):
        raise IllConditionedError(
            "Sonine 系统的解非有限或非正",
            {"min": float(np.nanmin(cell_values)), "N": grid.N},
        )
    residual = float(np.max(np.abs(matrix @ cell_values - rhs)))
    midpoints = grid.times[:-1] + 0.5 * grid.h
    partner = TabulatedKernel(midpoints, cell_values)
    get_logger().debug(f"Sonine 伴随核求解完成: N={grid.N}, 残差={residual:.3e}")
    return SoninePartner(grid, cell_values, partner, residual)


def analytic_sonine_partner(kernel: MemoryKernel) -> PowerLawKernel:
    """幂律核的闭式伴随：(c, α) ↦ (1/c, 1-α)"""
    if not isinstance(kernel, PowerLawKernel):
        raise UnsupportedVariantError(
            f"闭式 Sonine 伴随只对 power_law 成立, 实际为 {kernel.family}"
        )
    return PowerLawKernel(1.0 / kernel.c, 1.0 - kernel.alpha)
