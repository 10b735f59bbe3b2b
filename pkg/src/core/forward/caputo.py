"""广义 Caputo 形式的一致性检查

若 K 是 M 的 Sonine 伴随核 (M∗K ≡ 1)，模态方程
u + λ M∗u = u(0) + 1∗f 与下式等价：

    d/dt [K∗(u - u(0))] + λ u = K∗f

这里检查其积分形式 K∗(u - u(0) - 1∗f) + λ ∫_0^t u = 0，避免数值求导。
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.core.kernels.memory_kernel import MemoryKernel
from src.core.kernels.sonine import SoninePartner, sonine_partner
from src.infrastructure.errors.exceptions import PreconditionError
from src.models.entities import TimeGrid
from src.utils.numerics import FloatArray, left_cumulative


@dataclass(frozen=True)
class CaputoCheck:
    residual: FloatArray
    max_abs: float
    relative: float


def cell_convolve(cell_values: FloatArray, g: FloatArray, step: float) -> FloatArray:
    """分段常数核与分段线性 g 的精确卷积：Σ_j K_j h (g_{n-j} + g_{n-j-1}) / 2"""
    g = np.asarray(g, dtype=float)
    cells = np.asarray(cell_values, dtype=float)
    n_cells = cells.size
    if g.size != n_cells + 1:
        raise PreconditionError("网格函数长度与伴随核单元数不符")
    midpoint_values = 0.5 * (g[1:] + g[:-1])
    result = np.zeros(n_cells + 1)
    result[1:] = step * np.convolve(cells, midpoint_values)[:n_cells]
    return result


def caputo_form(
    kernel: MemoryKernel,
    lam: float,
    u: FloatArray,
    source_row: FloatArray,
    grid: TimeGrid,
    partner: SoninePartner | None = None,
) -> CaputoCheck:
    """积分形式的残差；relative 以 λ∫u 的最大值为尺度"""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.N + 1,):
        raise PreconditionError("轨迹长度与网格不符")
    if partner is None:
        partner = sonine_partner(kernel, grid)
    forcing = left_cumulative(np.asarray(source_row, dtype=float), grid.h)
    memory_part = cell_convolve(partner.cell_values, u - u[0] - forcing, grid.h)
    local_part = lam * cumulative_trapezoid(u, dx=grid.h, initial=0.0)
    residual = memory_part + local_part
    max_abs = float(np.max(np.abs(residual)))
    scale = max(float(np.max(np.abs(local_part))), float(np.max(np.abs(memory_part))))
    relative = max_abs / scale if scale > 0.0 else max_abs
    return CaputoCheck(residual=residual, max_abs=max_abs, relative=relative)
