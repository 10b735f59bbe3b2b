"""源项历史与初值的恢复

对每个模态，观测节点 t_n ∈ [t0, T] 上

    u_k(t_n) - z_k(t_n) = s_k(t_n) u_k(0) + Σ_{j<i0} h ρ_k(t_{n-j}) f_k(t_j)

s_k 为 g ≡ 1 的松弛函数，ρ_k 为从第 1 个节点开始的单位阶跃响应，
z_k 为已知窗口源项的响应。按 Tikhonov 正则化最小二乘求解。
"""

from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import lstsq

from src.core.executor.mode_executor import ModeExecutor
from src.core.kernels.memory_kernel import (
    DistributedOrderKernel,
    MemoryKernel,
    PowerLawKernel,
    TemperedKernel,
)
from src.core.inverse.settings import DEFAULT_SETTINGS, RegularizationSettings
from src.core.volterra.product_integration import (
    ProductWeights,
    product_weights,
    solve_second_kind,
)
from src.infrastructure.errors.exceptions import PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.models.entities import ObservationWindow, RecoveryReport, TimeGrid
from src.utils.numerics import FloatArray, left_cumulative


def history_design(
    lam: float, grid: TimeGrid, weights: ProductWeights
) -> FloatArray:
    """列：[s, h ρ_{·-0}, h ρ_{·-1}, ..., h ρ_{·-(i0-1)}]，行：节点 i0..N"""
    i0, _ = grid.require_markers()
    relaxation = solve_second_kind(None, lam, np.ones(grid.N + 1), grid, weights)
    step = np.ones(grid.N + 1)
    step[0] = 0.0
    response = solve_second_kind(None, lam, step, grid, weights).values
    rows = np.arange(i0, grid.N + 1)
    design = np.zeros((rows.size, i0 + 1))
    design[:, 0] = relaxation.values[rows]
    for j in range(i0):
        design[:, j + 1] = grid.h * response[rows - j]
    return design


def tikhonov_solve(design: FloatArray, rhs: FloatArray, weight: float) -> FloatArray:
    """min ||A c - d||² + (τ σ_max)² ||c||²"""
    sigma_max = float(np.linalg.norm(design, 2))
    tau = weight * sigma_max
    unknowns = design.shape[1]
    stacked = np.vstack([design, tau * np.eye(unknowns)])
    padded = np.concatenate([rhs, np.zeros(unknowns)])
    coefficients, _, _, _ = lstsq(stacked, padded)
    return np.asarray(coefficients, dtype=float)


def recover_history(
    kernel: MemoryKernel,
    eigenvalues: Sequence[float],
    window: ObservationWindow,
    settings: RegularizationSettings = DEFAULT_SETTINGS,
    threads: Optional[int] = None,
) -> RecoveryReport:
    """恢复 u_k(0) 与 f_k 在 [0, t0) 上的取值"""
    if not isinstance(kernel, (PowerLawKernel, TemperedKernel, DistributedOrderKernel)):
        raise PreconditionError(
            "历史恢复只适用于 power_law/tempered/distributed_order 核，"
            f"实际为 {kernel.family}"
        )
    if window.is_scalar:
        raise PreconditionError("历史恢复需要逐模态观测")
    grid = window.grid
    i0, _ = grid.require_markers()
    lam = np.asarray(eigenvalues, dtype=float)
    mode_count = window.source.mode_count
    if lam.size != mode_count:
        raise PreconditionError("特征值个数与模态数不符")
    logger = get_logger()
    weights = product_weights(kernel, grid)
    window_source = window.source.window_part()
    rows = np.arange(i0, grid.N + 1)
    unknowns = i0 + 1
    warnings: List[str] = []
    if rows.size < unknowns:
        message = f"观测节点 {rows.size} 少于未知量 {unknowns}，返回最小范数解"
        logger.warning(message)
        warnings.append(message)

    def solve_mode(k: int) -> tuple[Optional[FloatArray], float]:
        design = history_design(float(lam[k]), grid, weights)
        if not np.any(design != 0.0):
            return None, 0.0
        forced = solve_second_kind(
            None,
            float(lam[k]),
            left_cumulative(window_source[k], grid.h),
            grid,
            weights,
        ).values
        rhs = window.data[k, rows] - forced[rows]
        coefficients = tikhonov_solve(design, rhs, settings.tikhonov)
        misfit = float(np.linalg.norm(design @ coefficients - rhs))
        scale = float(np.linalg.norm(rhs))
        return coefficients, misfit / scale if scale > 0.0 else misfit

    outcomes = ModeExecutor(threads).map(
        solve_mode, list(range(mode_count)), "历史恢复"
    )
    history = np.zeros((mode_count, i0))
    initial = np.zeros(mode_count)
    residuals: Dict[int, float] = {}
    skipped: List[int] = []
    for k, (coefficients, misfit) in enumerate(outcomes):
        if coefficients is None:
            skipped.append(k + 1)
            logger.info(f"模态 {k + 1} 的松弛灵敏度为零，已跳过")
            continue
        initial[k] = coefficients[0]
        history[k] = coefficients[1:]
        residuals[k + 1] = misfit

    return RecoveryReport(
        kind="history",
        times=grid.times[:i0].copy(),
        values=history,
        residuals=residuals,
        parameters={
            "initial_coefficients": initial.tolist(),
            "skipped_modes": skipped,
            "tikhonov": settings.tikhonov,
        },
        warnings=warnings,
    )
