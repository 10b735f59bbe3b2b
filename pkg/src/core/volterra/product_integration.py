"""弱奇异卷积的乘积积分

未知函数在网格上取分段线性插值，核的矩由原函数精确给出：

    (M∗g)(t_n) ≈ w0[n]·g_0 + Σ_{j=1}^n tw[n-j]·g_j

    tw[0] = P2(h)/h
    tw[m] = (P2((m+1)h) - 2 P2(mh) + P2((m-1)h)) / h,   m ≥ 1
    w0[n] = P1(t_n) - (P2(t_n) - P2(t_{n-1})) / h

tw[m]/h 是核在 t_m 处的帽函数加权平均。
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.kernels.memory_kernel import MemoryKernel
from src.infrastructure.errors.exceptions import PreconditionError, StepSizeError
from src.models.entities import ModeTrajectory, TimeGrid
from src.utils.numerics import FloatArray


@dataclass(frozen=True)
class ProductWeights:
    """乘积积分权重，tw 长度 N，start 长度 N+1（start[0] = 0）"""

    step: float
    toeplitz: FloatArray
    start: FloatArray

    @property
    def size(self) -> int:
        return int(self.toeplitz.size)


def product_weights(kernel: MemoryKernel, grid: TimeGrid) -> ProductWeights:
    """由 P1/P2 计算网格上的权重"""
    h = grid.h
    times = grid.times
    p1 = np.asarray(kernel.primitive(times), dtype=float)
    p2 = np.asarray(kernel.second_primitive(times), dtype=float)
    toeplitz = np.empty(grid.N)
    toeplitz[0] = p2[1] / h
    toeplitz[1:] = (p2[2:] - 2.0 * p2[1:-1] + p2[:-2]) / h
    start = np.zeros(grid.N + 1)
    start[1:] = p1[1:] - (p2[1:] - p2[:-1]) / h
    return ProductWeights(step=h, toeplitz=toeplitz, start=start)


def kernel_hat_samples(kernel: MemoryKernel, grid: TimeGrid) -> FloatArray:
    """tw[m]/h，m = 0..N-1：反卷积恢复的正是这组量"""
    weights = product_weights(kernel, grid)
    return weights.toeplitz / weights.step


def _resolve_weights(
    kernel: Optional[MemoryKernel], grid: TimeGrid, weights: Optional[ProductWeights]
) -> ProductWeights:
    if weights is not None:
        if weights.size != grid.N:
            raise PreconditionError("权重长度与网格不符")
        return weights
    if kernel is None:
        raise PreconditionError("需要给出核或预先计算的权重")
    return product_weights(kernel, grid)


def apply_weights(weights: ProductWeights, g: FloatArray) -> FloatArray:
    """用给定权重计算离散卷积，结果[0] = 0"""
    g = np.asarray(g, dtype=float)
    n_cells = weights.size
    if g.shape[-1] != n_cells + 1:
        raise PreconditionError(f"网格函数长度 {g.shape[-1]} 与权重不符")
    result = np.zeros(n_cells + 1)
    history = np.convolve(weights.toeplitz, g[1:])[:n_cells]
    result[1:] = history + weights.start[1:] * g[0]
    return result


def weighted_convolve(
    kernel: Optional[MemoryKernel],
    g: FloatArray,
    grid: TimeGrid,
    weights: Optional[ProductWeights] = None,
) -> FloatArray:
    """(M∗g)(t_n) 的乘积积分近似"""
    return apply_weights(_resolve_weights(kernel, grid, weights), g)


def solve_second_kind(
    kernel: Optional[MemoryKernel],
    lam: float,
    g: FloatArray,
    grid: TimeGrid,
    weights: Optional[ProductWeights] = None,
) -> ModeTrajectory:
    """逐步推进求解 v + λ M∗v = g，v_0 = g_0"""
    if lam < 0.0:
        raise PreconditionError(f"λ 必须非负: {lam}")
    g = np.asarray(g, dtype=float)
    if g.shape != (grid.N + 1,):
        raise PreconditionError(f"右端长度 {g.shape} 与网格不符")
    if lam == 0.0:
        return ModeTrajectory(grid, g.copy())
    w = _resolve_weights(kernel, grid, weights)
    diagonal = 1.0 + lam * w.toeplitz[0]
    if diagonal <= 0.0:
        raise StepSizeError(
            f"对角权重 1 + λ·w = {diagonal:.3e} 不可逆，请加密时间网格",
            {"lambda": lam, "h": grid.h},
        )
    tw, start = w.toeplitz, w.start
    v = np.empty(grid.N + 1)
    v[0] = g[0]
    for n in range(1, grid.N + 1):
        history = start[n] * v[0] + np.dot(tw[n - 1 : 0 : -1], v[1:n])
        v[n] = (g[n] - lam * history) / diagonal
    return ModeTrajectory(grid, v)


def mode_residual(
    weights: ProductWeights, lam: float, v: FloatArray, g: FloatArray
) -> float:
    """max |v + λ M∗v - g|"""
    return float(np.max(np.abs(v + lam * apply_weights(weights, v) - g)))
