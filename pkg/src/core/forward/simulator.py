"""正问题：按特征函数展开求解 ∂/∂t[u - A M∗u] = f

对每个模态 k，积分形式为第二类 Volterra 方程

    u_k + λ_k (M∗u_k) = u_k(0) + (1∗f_k)

其中 λ_k > 0 是 -A 的特征值。
"""

from typing import Optional, Sequence, Union

import numpy as np

from src.core.executor.mode_executor import ModeExecutor
from src.core.kernels.memory_kernel import MemoryKernel
from src.core.operators.spectral_operator import FractionalSpectrum, SpectralOperator
from src.core.volterra.product_integration import (
    ProductWeights,
    mode_residual,
    product_weights,
    solve_second_kind,
)
from src.infrastructure.errors.exceptions import (
    FracMemoryError,
    ModeSolveError,
    PreconditionError,
)
from src.infrastructure.logging.logger import get_logger
from src.models.entities import SimulationResult, SourceModel, TimeGrid
from src.utils.numerics import FloatArray, left_cumulative

Spectrum = Union[FractionalSpectrum, Sequence[float], FloatArray]


def zero_source(grid: TimeGrid, mode_count: int) -> SourceModel:
    return SourceModel(grid, np.zeros((mode_count, grid.N + 1)))


def _unpack_spectrum(
    spectrum: Spectrum,
) -> tuple[FloatArray, Optional[SpectralOperator]]:
    if isinstance(spectrum, FractionalSpectrum):
        return np.asarray(spectrum.eigenvalues, dtype=float), spectrum.base
    return np.atleast_1d(np.asarray(spectrum, dtype=float)), None


def mode_right_side(u0: float, source_row: FloatArray, grid: TimeGrid) -> FloatArray:
    """u_k(0) + (1∗f_k)(t_n)"""
    return u0 + left_cumulative(source_row, grid.h)


def simulate(
    spectrum: Spectrum,
    kernel: MemoryKernel,
    u0_coeffs: Sequence[float],
    source: SourceModel,
    grid: TimeGrid,
    threads: Optional[int] = None,
    weights: Optional[ProductWeights] = None,
) -> SimulationResult:
    """逐模态求解，权重只计算一次"""
    eigenvalues, operator = _unpack_spectrum(spectrum)
    u0 = np.asarray(u0_coeffs, dtype=float).ravel()
    mode_count = eigenvalues.size
    if u0.size != mode_count or source.mode_count != mode_count:
        raise PreconditionError(
            f"模态数不一致: λ={mode_count}, u0={u0.size}, f={source.mode_count}"
        )
    if source.values.shape[1] != grid.N + 1:
        raise PreconditionError("源项网格与求解网格不符")
    if np.any(eigenvalues < 0.0):
        raise PreconditionError("模态特征值必须非负")
    logger = get_logger()
    if weights is None:
        weights = product_weights(kernel, grid)

    def solve_mode(k: int) -> tuple[FloatArray, float]:
        g = mode_right_side(u0[k], source.values[k], grid)
        try:
            v = solve_second_kind(None, float(eigenvalues[k]), g, grid, weights)
        except FracMemoryError as exc:
            raise ModeSolveError(k + 1, exc.message, exc.details) from exc
        except (ArithmeticError, ValueError) as exc:
            raise ModeSolveError(k + 1, str(exc)) from exc
        return v.values, mode_residual(weights, float(eigenvalues[k]), v.values, g)

    results = ModeExecutor(threads).map(solve_mode, list(range(mode_count)), "模态求解")
    modes = np.vstack([values for values, _ in results])
    residuals = np.array([residual for _, residual in results])
    logger.info(
        f"正问题求解完成: K={mode_count}, N={grid.N}, "
        f"最大残差={float(np.max(residuals)):.3e}"
    )
    return SimulationResult(
        grid=grid,
        modes=modes,
        initial_coefficients=u0,
        eigenvalues=eigenvalues,
        residuals=residuals,
        operator=operator,
    )


def observe(result: SimulationResult, coefficients: Sequence[float]) -> FloatArray:
    """⟨Φ, u(t)⟩ = Σ_k Φ_k u_k(t)"""
    phi = np.asarray(coefficients, dtype=float).ravel()
    if phi.size != result.mode_count:
        raise PreconditionError(
            f"观测系数个数 {phi.size} 与模态数 {result.mode_count} 不符"
        )
    if not np.any(phi != 0.0):
        get_logger().warning("观测泛函零化了全部模态，观测恒为零")
    return np.asarray(phi @ result.modes, dtype=float)
