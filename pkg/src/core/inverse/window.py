"""观测窗口的原点平移

在 (t0, t1) 内源项为零，数据只含历史部分 Y(t)。三种消去 Y 的方式：

- known_zero: 历史为零，w = u(t_s + ·)
- exact: 合成实验给出 Y 的真值，直接相减，同时报告替代模型的误差
- surrogate: 在 [t0, t1] 上用指数和拟合 Y，再延拓到 (t1, T]

完全单调核的松弛函数完全单调，因此符号确定的 Y 用非负指数和拟合；
Y 在间隙上变号时退回带岭的最小二乘。
平移起点 t_s 取各模态源项在 t1 之后的首个非零节点。
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import lstsq

from src.core.forward.sources import leading_support_indices
from src.core.inverse.settings import DEFAULT_SETTINGS, RegularizationSettings
from src.core.kernels.exponential_sum import exponential_columns, fit_nonnegative
from src.infrastructure.errors.exceptions import PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.models.entities import ObservationWindow, TimeGrid
from src.utils.numerics import FloatArray, left_cumulative, relative_l2

MIN_GAP_CELLS = 3


@dataclass(frozen=True)
class ShiftedMode:
    """平移后的单模态数据：w(t) = u(t_s + t) - Y(t_s + t)，forcing = (1∗f)(t_s + ·)"""

    mode: int
    start_index: int
    grid: TimeGrid
    values: FloatArray
    forcing: FloatArray
    method: str
    surrogate_error: Optional[float] = None


def _definite_sign(values: FloatArray) -> int:
    if np.all(values >= 0.0):
        return 1
    if np.all(values <= 0.0):
        return -1
    return 0


def fit_exponential_surrogate(
    times: FloatArray,
    values: FloatArray,
    origin: float,
    rates: Sequence[float],
    ridge: float,
    monotone: bool = True,
) -> FloatArray:
    """返回指数和 Σ c_j e^{-r_j (t - origin)} 的系数"""
    rates_array = np.asarray(rates, dtype=float)
    values = np.asarray(values, dtype=float)
    design = exponential_columns(times, rates_array, origin)
    if monotone:
        sign = _definite_sign(values)
        if sign != 0:
            fit = fit_nonnegative(design, sign * values, rates_array)
            return sign * fit.weights
        get_logger().debug("间隙上的历史数据变号，改用带岭的最小二乘")
    sigma_max = float(np.linalg.norm(design, 2)) if design.size else 0.0
    tau = ridge * sigma_max
    stacked = np.vstack([design, tau * np.eye(rates_array.size)])
    rhs = np.concatenate([values, np.zeros(rates_array.size)])
    coefficients, _, _, _ = lstsq(stacked, rhs)
    return np.asarray(coefficients, dtype=float)


def continue_history(
    data: FloatArray, grid: TimeGrid, settings: RegularizationSettings
) -> FloatArray:
    """在间隙节点 i0..i1 上拟合 Y 并延拓到整个网格"""
    i0, i1 = grid.require_markers()
    times = grid.times
    coefficients = fit_exponential_surrogate(
        times[i0 : i1 + 1],
        data[i0 : i1 + 1],
        times[i0],
        settings.surrogate_rates,
        settings.surrogate_ridge,
        settings.monotone_surrogate,
    )
    design = exponential_columns(times, settings.surrogate_rates, times[i0])
    return np.asarray(design @ coefficients, dtype=float)


def check_gap(grid: TimeGrid) -> None:
    i0, i1 = grid.require_markers()
    if i1 - i0 < MIN_GAP_CELLS:
        raise PreconditionError(
            f"间隙 (t0, t1) 只有 {i1 - i0} 个单元，至少需要 {MIN_GAP_CELLS} 个"
        )


def eliminate_history(
    data: FloatArray,
    grid: TimeGrid,
    known_zero: bool = False,
    history: Optional[FloatArray] = None,
    settings: RegularizationSettings = DEFAULT_SETTINGS,
) -> tuple[FloatArray, str, Optional[float]]:
    """返回 (data - Y, 方法名, 替代模型相对误差)"""
    check_gap(grid)
    data = np.asarray(data, dtype=float)
    if known_zero:
        return data.copy(), "known_zero", None
    _, i1 = grid.require_markers()
    surrogate = continue_history(data, grid, settings)
    if history is not None:
        history = np.asarray(history, dtype=float)
        error = relative_l2(surrogate[i1:], history[i1:])
        return data - history, "exact", error
    return data - surrogate, "surrogate", None


def shift_origin(
    window: ObservationWindow,
    settings: RegularizationSettings = DEFAULT_SETTINGS,
    start_indices: Optional[Sequence[Optional[int]]] = None,
) -> List[Optional[ShiftedMode]]:
    """逐模态平移到源项支撑起点；未被激发的模态返回 None"""
    grid = window.grid
    check_gap(grid)
    if window.is_scalar:
        raise PreconditionError("逐模态平移需要逐模态观测数据")
    _, i1 = grid.require_markers()
    if start_indices is None:
        start_indices = leading_support_indices(window.source)
    window_source = window.source.window_part()
    logger = get_logger()

    shifted: List[Optional[ShiftedMode]] = []
    for k, start in enumerate(start_indices):
        if start is None:
            shifted.append(None)
            continue
        if start < i1:
            raise PreconditionError(f"模态 {k + 1} 的平移起点在 t1 之前")
        if start > i1:
            logger.debug(
                f"模态 {k + 1}: 平移起点 t={grid.times[start]:.6g} 晚于间隙终点 "
                f"t1={grid.times[i1]:.6g}（{start - i1} 步）"
            )
        history = None
        if window.history_trajectory is not None:
            history = np.atleast_2d(window.history_trajectory)[k]
        cleaned, method, error = eliminate_history(
            window.data[k], grid, window.known_zero_history, history, settings
        )
        sub_grid = grid.shifted(start)
        forcing = left_cumulative(window_source[k, start:], grid.h)
        shifted.append(
            ShiftedMode(
                mode=k + 1,
                start_index=start,
                grid=sub_grid,
                values=cleaned[start:].copy(),
                forcing=forcing,
                method=method,
                surrogate_error=error,
            )
        )
        if error is not None:
            logger.debug(f"模态 {k + 1}: 历史替代模型相对误差 {error:.3e}")
    return shifted
