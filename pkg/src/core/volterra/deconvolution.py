"""第一类 Volterra 方程 M∗w = r 的 Lavrentiev 正则化解

未知量 x_m 为核在 t_m = mh 处的帽函数平均（x_0 为半帽）。第 n 行：

    h [Σ_{m<n} w_{n-m} x_m + w_0·c_n] + ε x_{n-1} = r_n

其中 c_n 用相邻未知量外推末单元的上升半帽：
c_1 = x_0，c_2 = x_1/2，c_n = (5/6)x_{n-1} - (1/3)x_{n-2}。
w_0 = 0 时离散关系与 weighted_convolve 完全一致。
"""

import math
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular, toeplitz
from scipy.optimize import brentq

from src.infrastructure.errors.exceptions import (
    DomainError,
    IllConditionedError,
    PreconditionError,
)
from src.infrastructure.logging.logger import get_logger
from src.models.entities import DeconvolutionResult, TimeGrid
from src.utils.numerics import FloatArray

UNRELIABLE_NODES = (0, 1)
_DIAGONAL_GUARD = 1e-14
_SCAN_POINTS = 57


def convolution_matrix(w: FloatArray, grid: TimeGrid) -> FloatArray:
    """未正则化的下三角矩阵 A，A x ≈ (M∗w)(t_1..t_N)"""
    w = np.asarray(w, dtype=float)
    if w.shape != (grid.N + 1,):
        raise PreconditionError(f"w 的长度 {w.shape} 与网格不符")
    h = grid.h
    matrix = toeplitz(h * w[1:], np.zeros(grid.N))
    if w[0] != 0.0:
        head = h * w[0]
        matrix[0, 0] += head
        if grid.N >= 2:
            matrix[1, 1] += 0.5 * head
        rows = np.arange(2, grid.N)
        matrix[rows, rows] += (5.0 / 6.0) * head
        matrix[rows, rows - 1] -= (1.0 / 3.0) * head
    return matrix


def _solve(
    matrix: FloatArray, rhs: FloatArray, epsilon: float
) -> Tuple[FloatArray, float]:
    regularized = matrix + epsilon * np.eye(matrix.shape[0])
    diagonal = np.abs(np.diag(regularized))
    scale = float(np.max(np.abs(regularized)))
    if np.min(diagonal) <= _DIAGONAL_GUARD * scale:
        index = int(np.argmin(diagonal))
        raise IllConditionedError(
            f"反卷积系统在第 {index} 行对角元接近零，w 在原点附近可能退化",
            {"row": index, "diagonal": float(diagonal[index]), "epsilon": epsilon},
        )
    x = solve_triangular(regularized, rhs, lower=True, check_finite=False)
    residual = float(np.linalg.norm(matrix @ x - rhs))
    return x, residual


def deconvolve_first_kind(
    w: FloatArray, r: FloatArray, epsilon: float, grid: TimeGrid
) -> DeconvolutionResult:
    """一次前代求解 (εI + A) x = r"""
    if epsilon < 0.0 or not math.isfinite(epsilon):
        raise DomainError(f"正则化参数必须非负: ε={epsilon}")
    w = np.asarray(w, dtype=float)
    r = np.asarray(r, dtype=float)
    if not np.any(w != 0.0):
        raise PreconditionError("w 在整个窗口上恒为零，卷积方程不可解")
    if r.shape != (grid.N + 1,):
        raise PreconditionError(f"r 的长度 {r.shape} 与网格不符")
    matrix = convolution_matrix(w, grid)
    x, residual = _solve(matrix, r[1:], epsilon)
    return DeconvolutionResult(
        times=grid.times[:-1].copy(),
        values=x,
        epsilon=epsilon,
        residual_norm=residual,
        unreliable_nodes=list(UNRELIABLE_NODES),
    )


def estimate_noise(data: FloatArray, window: float = 0.25) -> float:
    """由后段二阶差分估计加性噪声标准差：Var(Δ²e) = 6σ²"""
    data = np.asarray(data, dtype=float)
    count = max(int(window * data.size), 8)
    tail = data[-count:]
    if tail.size < 3:
        return 0.0
    return float(np.std(np.diff(tail, 2)) / math.sqrt(6.0))


def discrepancy_epsilon(
    w: FloatArray,
    r: FloatArray,
    grid: TimeGrid,
    noise: Optional[float] = None,
) -> DeconvolutionResult:
    """按偏差原则选 ε：残差 ≈ noise·√N"""
    r = np.asarray(r, dtype=float)
    if noise is None:
        noise = estimate_noise(r)
    if noise < 0.0:
        raise DomainError(f"噪声水平必须非负: {noise}")
    matrix = convolution_matrix(np.asarray(w, dtype=float), grid)
    rhs = r[1:]
    target = noise * math.sqrt(grid.N)
    scale = max(float(np.max(np.abs(np.diag(matrix)))), float(np.max(np.abs(matrix))))

    def result_for(epsilon: float) -> DeconvolutionResult:
        x, residual = _solve(matrix, rhs, epsilon)
        return DeconvolutionResult(
            times=grid.times[:-1].copy(),
            values=x,
            epsilon=epsilon,
            residual_norm=residual,
            unreliable_nodes=list(UNRELIABLE_NODES),
        )

    log_grid = np.linspace(-14.0, 1.0, _SCAN_POINTS) + math.log10(scale)
    residuals = []
    for log_eps in log_grid:
        residuals.append(result_for(10.0**log_eps).residual_norm)
    residuals_array = np.asarray(residuals)
    above = np.nonzero(residuals_array >= target)[0]
    if target <= 0.0 or above.size == 0:
        chosen = 10.0 ** log_grid[0] if target <= 0.0 else 10.0 ** log_grid[-1]
    elif above[0] == 0:
        chosen = 10.0 ** log_grid[0]
    else:
        lo, hi = log_grid[above[0] - 1], log_grid[above[0]]
        log_eps = brentq(
            lambda value: result_for(10.0**value).residual_norm - target,
            lo,
            hi,
            xtol=1e-6,
        )
        chosen = 10.0**log_eps
    result = result_for(chosen)
    get_logger().debug(
        f"偏差原则: noise={noise:.3e}, ε={chosen:.3e}, 残差={result.residual_norm:.3e}"
    )
    return result
