"""核恢复与核-算子乘积恢复

平移后的每个模态满足第一类方程

    λ_k (M∗w_k) = (1∗f_k) - w_k

λ_k 已知时逐模态反卷积得到 M 并按残差平方的倒数加权汇总；λ_k 未知时以 w_k
为卷积核得到乘积 m_k = λ_k M，再用规范 M(t_g) = 1 分离出 M 与 λ_k。

w_k 与右端同源于带噪数据，卷积矩阵本身的噪声给第 n 行带来 λ_k h ‖x‖ σ 量级
的扰动，偏差原则的目标按此逐模态放大。带噪数据上默认再把各模态方程按噪声
加权堆叠，拟合非负指数和形式的完全单调核。
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.executor.mode_executor import ModeExecutor
from src.core.forward.sources import excitation_energy
from src.core.inverse.settings import DEFAULT_SETTINGS, RegularizationSettings
from src.core.inverse.window import ShiftedMode, shift_origin
from src.core.kernels.exponential_sum import (
    ExponentialSum,
    fit_nonnegative,
    hat_sample_columns,
    rate_grid,
)
from src.core.volterra.deconvolution import (
    UNRELIABLE_NODES,
    convolution_matrix,
    deconvolve_first_kind,
    discrepancy_epsilon,
    estimate_noise,
)
from src.infrastructure.errors.exceptions import InconsistencyError, PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.models.entities import DeconvolutionResult, ObservationWindow, RecoveryReport
from src.utils.numerics import FloatArray

GAUGE_TIME = 1.0
FIRST_RELIABLE = max(UNRELIABLE_NODES) + 1
# 汇总核解释某模态数据的均方根失配不超过该倍数的噪声时，视为与该模态一致
CONSISTENCY_FACTOR = 3.0


@dataclass(frozen=True)
class ModeDeconvolution:
    mode: int
    shifted: ShiftedMode
    result: DeconvolutionResult
    scale: float
    # 方程右端的等效逐行噪声标准差，无噪或未知时为 0
    noise: float = 0.0

    @property
    def residual(self) -> float:
        return self.result.residual_norm / np.sqrt(self.result.values.size)

    def system(self, length: int) -> Tuple[FloatArray, FloatArray]:
        """截断到前 length 个未知量的 (A, r)"""
        w = self.scale * self.shifted.values
        matrix = convolution_matrix(w, self.shifted.grid)
        rhs = self.shifted.forcing - self.shifted.values
        return matrix[:length, :length], rhs[1 : length + 1]

    def misfit(self, estimate: FloatArray) -> float:
        matrix, rhs = self.system(estimate.size)
        return float(np.linalg.norm(matrix @ estimate - rhs) / np.sqrt(rhs.size))


def effective_noise(
    noise: float, scale: float, step: float, estimate: FloatArray
) -> float:
    """右端噪声 σ 与卷积矩阵噪声 scale·h·‖x‖·σ 的合成"""
    return noise * math.hypot(1.0, scale * step * float(np.linalg.norm(estimate)))


def _deconvolve(
    shifted: ShiftedMode, scale: float, settings: RegularizationSettings
) -> ModeDeconvolution:
    w = scale * shifted.values
    r = shifted.forcing - shifted.values
    grid = shifted.grid
    if settings.epsilon is not None:
        result = deconvolve_first_kind(w, r, settings.epsilon, grid)
        return ModeDeconvolution(
            shifted.mode, shifted, result, scale, settings.noise or 0.0
        )
    if settings.noise is not None and settings.noise == 0.0:
        result = deconvolve_first_kind(w, r, 0.0, grid)
        return ModeDeconvolution(shifted.mode, shifted, result, scale)
    noise = settings.noise if settings.noise is not None else estimate_noise(r)
    pilot = discrepancy_epsilon(w, r, grid, noise)
    effective = effective_noise(noise, scale, grid.h, pilot.values)
    result = pilot
    if effective > noise:
        result = discrepancy_epsilon(w, r, grid, effective)
    return ModeDeconvolution(shifted.mode, shifted, result, scale, effective)


def _excited_modes(
    window: ObservationWindow, settings: RegularizationSettings
) -> tuple[List[ShiftedMode], List[int]]:
    energies = excitation_energy(window.source)
    shifted = shift_origin(window, settings)
    usable: List[ShiftedMode] = []
    skipped: List[int] = []
    for k, item in enumerate(shifted):
        if item is None or energies[k] < settings.energy_floor:
            skipped.append(k + 1)
            continue
        usable.append(item)
    if not usable:
        raise PreconditionError("所有模态都未被 (t1, T) 上的源项激发")
    return usable, skipped


def _common_length(items: Sequence[ModeDeconvolution]) -> int:
    return min(item.result.values.size for item in items)


def fit_monotone_kernel(
    items: Sequence[ModeDeconvolution], length: int
) -> ExponentialSum:
    """各模态方程按噪声加权堆叠，拟合帽函数平均意义下的非负指数和核"""
    step = items[0].shifted.grid.h
    rates = rate_grid(0.1 / (length * step), 10.0 / step)
    basis = hat_sample_columns(rates, step, length)
    blocks: List[FloatArray] = []
    rhs: List[FloatArray] = []
    for item in items:
        matrix, r = item.system(length)
        sigma = max(item.noise, 1e-14 * (1.0 + float(np.max(np.abs(r)))))
        blocks.append(matrix @ basis / sigma)
        rhs.append(r / sigma)
    return fit_nonnegative(np.vstack(blocks), np.concatenate(rhs), rates)


def recover_kernel(
    window: ObservationWindow,
    eigenvalues: Sequence[float],
    settings: RegularizationSettings = DEFAULT_SETTINGS,
    threads: Optional[int] = None,
) -> RecoveryReport:
    """已知 λ_k，恢复核在平移窗口上的帽函数平均值"""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size != window.source.mode_count:
        raise PreconditionError("特征值个数与模态数不符")
    logger = get_logger()
    usable, skipped = _excited_modes(window, settings)
    results = ModeExecutor(threads).map(
        lambda item: _deconvolve(item, float(lam[item.mode - 1]), settings),
        usable,
        "逐模态反卷积",
    )
    length = _common_length(results)
    grid = results[0].shifted.grid
    samples = np.vstack([item.result.values[:length] for item in results])
    residuals = np.array([item.residual for item in results])
    floor = 1e-14 * (1.0 + float(np.max(np.abs(samples))))
    weights = 1.0 / (residuals + floor) ** 2
    aggregate = weights @ samples / np.sum(weights)
    aggregation = "residual_weighted"
    parameters: Dict[str, Any] = {}
    noisy = settings.epsilon is None and all(item.noise > 0.0 for item in results)
    if settings.completely_monotone and noisy:
        fit = fit_monotone_kernel(results, length)
        aggregate = fit.hat_samples(grid.h, length)
        aggregation = "completely_monotone"
        parameters["decay_rates"] = fit.support.tolist()
        logger.debug(
            f"完全单调拟合: {fit.support.size} 个衰减率，"
            f"加权残差 {fit.residual_norm:.3e}"
        )

    reliable = slice(FIRST_RELIABLE, length)
    norm = float(np.linalg.norm(aggregate[reliable]))
    spreads: Dict[int, float] = {}
    misfits: Dict[int, float] = {}
    inconsistent: List[int] = []
    for item, row in zip(results, samples):
        deviation = float(np.linalg.norm(row[reliable] - aggregate[reliable]))
        spreads[item.mode] = deviation / norm if norm > 0.0 else deviation
        misfits[item.mode] = item.misfit(aggregate)
        explained = item.noise > 0.0 and (
            misfits[item.mode] <= CONSISTENCY_FACTOR * item.noise
        )
        if spreads[item.mode] > settings.spread_threshold and not explained:
            inconsistent.append(item.mode)
    warnings: List[str] = []
    spread = max(spreads.values())
    if inconsistent:
        worst = max(spreads[mode] for mode in inconsistent)
        message = (
            f"模态 {inconsistent} 的核估计离散度 {worst:.3e} 超过阈值 "
            f"{settings.spread_threshold}，且汇总核无法在噪声水平内解释其数据，"
            "数据可能不是由单一核生成"
        )
        logger.warning(message)
        warnings.append(message)
    if skipped:
        logger.info(f"未被激发的模态已排除: {skipped}")

    parameters.update(
        {
            "aggregation": aggregation,
            "epsilon": {item.mode: item.result.epsilon for item in results},
            "noise": {item.mode: item.noise for item in results},
            "excluded_modes": skipped,
            "methods": {item.mode: item.shifted.method for item in results},
        }
    )
    return RecoveryReport(
        kind="kernel",
        times=grid.times[:length].copy(),
        values=aggregate,
        residuals={item.mode: float(item.residual) for item in results},
        unreliable_nodes=list(UNRELIABLE_NODES),
        parameters=parameters,
        warnings=warnings,
        diagnostics={"spread": spreads, "max_spread": spread, "misfit": misfits},
    )


def _gauge_time(times: FloatArray) -> float:
    if times[-1] >= GAUGE_TIME:
        return GAUGE_TIME
    return 0.5 * (times[FIRST_RELIABLE] + times[-1])


def recover_product(
    window: ObservationWindow,
    settings: RegularizationSettings = DEFAULT_SETTINGS,
    threads: Optional[int] = None,
) -> RecoveryReport:
    """未知 λ_k：恢复 m_k = λ_k M，检查比例性并做规范 M(t_g) = 1"""
    logger = get_logger()
    usable, skipped = _excited_modes(window, settings)
    results = ModeExecutor(threads).map(
        lambda item: _deconvolve(item, 1.0, settings), usable, "乘积反卷积"
    )
    length = _common_length(results)
    grid = results[0].shifted.grid
    times = grid.times[:length]
    products = {item.mode: item.result.values[:length] for item in results}
    reliable = slice(FIRST_RELIABLE, length)

    reference_mode = results[0].mode
    reference = products[reference_mode]
    worst = 0.0
    for mode, product in products.items():
        ratio = product[reliable] / reference[reliable]
        level = float(np.median(ratio))
        deviation = float(np.max(np.abs(ratio / level - 1.0)))
        worst = max(worst, deviation)
    if worst > settings.proportionality_tolerance:
        raise InconsistencyError(
            f"各模态乘积不成比例: 最大偏差 {worst:.3e} > "
            f"{settings.proportionality_tolerance}",
            {"max_deviation": worst},
        )

    gauge_time = _gauge_time(times)
    gauge_value = float(np.interp(gauge_time, times, reference))
    if not gauge_value > 0.0:
        raise InconsistencyError(f"规范点处的核值非正: {gauge_value:.3e}")
    kernel = reference / gauge_value

    lam: Dict[int, Optional[float]] = {}
    basis = kernel[reliable]
    for k in range(1, window.source.mode_count + 1):
        if k in products:
            lam[k] = float(products[k][reliable] @ basis / (basis @ basis))
        else:
            lam[k] = None
    if skipped:
        logger.info(f"模态 {skipped} 未被激发，其特征值不可恢复")

    return RecoveryReport(
        kind="product",
        times=times.copy(),
        values=kernel,
        gauge_constant=1.0 / gauge_value,
        gauge_time=gauge_time,
        residuals={item.mode: float(item.residual) for item in results},
        unreliable_nodes=list(UNRELIABLE_NODES),
        parameters={
            "eigenvalues": lam,
            "unrecoverable_modes": skipped,
            "reference_mode": reference_mode,
        },
        diagnostics={
            "products": {mode: values.tolist() for mode, values in products.items()},
            "max_proportionality_deviation": worst,
        },
    )
