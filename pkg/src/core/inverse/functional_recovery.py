"""由标量观测 ⟨Φ, u(t)⟩ 在参数族内恢复核

历史先按窗口规则消去，然后在 [t1, T] 上最小化

    J(θ) = Σ_n |Σ_k Φ_k u_k^θ(t_n) - data(t_n)|² / Σ_n |data(t_n)|²

u_k^θ 为零历史下窗口源项驱动的模态解。参数先变换到无约束坐标
(log c, logit α, log λ)，在网格上筛选后取最优若干个点做 Nelder–Mead 精修。
当 ⟨Φ, f(t1+)⟩ = 0 时对数据与模型同时做 m 次平滑求导。
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from src.core.executor.mode_executor import ModeExecutor
from src.core.inverse.settings import DEFAULT_SETTINGS, RegularizationSettings
from src.core.inverse.window import eliminate_history
from src.core.kernels.memory_kernel import MemoryKernel, PowerLawKernel, TemperedKernel
from src.core.volterra.product_integration import product_weights, solve_second_kind
from src.infrastructure.errors.exceptions import (
    FracMemoryError,
    ObservabilityError,
    PreconditionError,
)
from src.infrastructure.logging.logger import get_logger
from src.models.entities import ObservationWindow, RecoveryReport
from src.utils.numerics import (
    FloatArray,
    central_derivative,
    left_cumulative,
    moving_average,
)

C_BOX = (0.1, 10.0)
ALPHA_BOX = (0.05, 0.95)
LAMBDA_BOX = (0.1, 10.0)
MAX_DERIVATIVE_ORDER = 2
_PENALTY = 1e6


@dataclass(frozen=True)
class KernelFamily:
    name: str
    parameter_names: Tuple[str, ...]

    def to_kernel(self, theta: FloatArray) -> MemoryKernel:
        c = math.exp(float(theta[0]))
        alpha = float(expit(theta[1]))
        if self.name == "power_law":
            return PowerLawKernel(c, alpha)
        return TemperedKernel(c, alpha, math.exp(float(theta[2])))

    def parameters(self, theta: FloatArray) -> Dict[str, float]:
        values = [math.exp(float(theta[0])), float(expit(theta[1]))]
        if self.name == "tempered":
            values.append(math.exp(float(theta[2])))
        return dict(zip(self.parameter_names, values))

    def start_grid(self, points: int) -> List[FloatArray]:
        axes = [
            np.log(np.geomspace(*C_BOX, points)),
            logit(np.linspace(*ALPHA_BOX, points)),
        ]
        if self.name == "tempered":
            axes.append(np.log(np.geomspace(*LAMBDA_BOX, points)))
        return [np.array(point) for point in itertools.product(*axes)]


FAMILIES = {
    "power_law": KernelFamily("power_law", ("c", "alpha")),
    "tempered": KernelFamily("tempered", ("c", "alpha", "lambda")),
}


def _leading_value(scalar: FloatArray, order: int, h: float) -> float:
    if order == 0:
        return float(scalar[0])
    return float(np.diff(scalar, order)[0] / h**order)


def derivative_order(
    coefficients: FloatArray,
    window_source: FloatArray,
    start: int,
    h: float,
    eigenvalues: Optional[FloatArray] = None,
) -> int:
    """⟨Φ, f^{(j)}(t1+)⟩ 的首个非零阶 m

    给出 λ_k 时同时要求 ⟨Φ, A f^{(m)}(t1+)⟩ = Σ_k Φ_k λ_k f_k^{(m)}(t1+) 非零。
    """
    scalar = coefficients @ window_source[:, start:]
    scale = float(np.max(np.abs(scalar))) if scalar.size else 0.0
    if scale == 0.0:
        raise ObservabilityError("观测泛函与窗口源项的组合恒为零")
    order = next(
        (
            j
            for j in range(MAX_DERIVATIVE_ORDER + 1)
            if abs(_leading_value(scalar, j, h)) > 1e-10 * scale / h**j
        ),
        None,
    )
    if order is None:
        raise ObservabilityError(
            f"源项在 t1+ 处的前 {MAX_DERIVATIVE_ORDER} 阶导数都被零化"
        )
    if eigenvalues is not None:
        weighted = (coefficients * eigenvalues) @ window_source[:, start:]
        weighted_scale = float(np.max(np.abs(weighted)))
        value = _leading_value(weighted, order, h)
        if abs(value) <= 1e-10 * weighted_scale / h**order:
            raise ObservabilityError(
                f"⟨Φ, A f^({order})(t1+)⟩ 为零，不满足可辨识条件"
            )
    return order


def _transform(values: FloatArray, order: int, width: int, h: float) -> FloatArray:
    if order == 0:
        return values
    return central_derivative(moving_average(values, width), h, order)


def recover_kernel_from_functional(
    window: ObservationWindow,
    coefficients: Sequence[float],
    eigenvalues: Sequence[float],
    family: str,
    settings: RegularizationSettings = DEFAULT_SETTINGS,
    threads: Optional[int] = None,
) -> RecoveryReport:
    """参数族内拟合核参数，多起点筛选加单纯形精修"""
    if family not in FAMILIES:
        raise PreconditionError(f"不支持的核族: {family!r}")
    if not window.is_scalar:
        raise PreconditionError("泛函恢复需要标量观测数据")
    kernel_family = FAMILIES[family]
    grid = window.grid
    _, i1 = grid.require_markers()
    phi = np.asarray(coefficients, dtype=float).ravel()
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    window_source = window.source.window_part()
    if phi.size != window_source.shape[0] or lam.size != phi.size:
        raise PreconditionError("Φ_k、λ_k 与源项模态数不一致")

    energies = np.sum(window_source**2, axis=1)
    active = np.nonzero((energies > 0.0) & (np.abs(phi) > 1e-14))[0]
    if active.size == 0:
        raise ObservabilityError("观测泛函零化了所有被激发的模态")
    order = derivative_order(
        phi[active], window_source[active], i1, grid.h, lam[active]
    )

    history = None
    if window.history_trajectory is not None:
        history = np.asarray(window.history_trajectory, dtype=float)
    cleaned, method, _ = eliminate_history(
        window.data, grid, window.known_zero_history, history, settings
    )
    sub_grid = grid.shifted(i1)
    forcing = [left_cumulative(window_source[k, i1:], grid.h) for k in active]
    target = _transform(cleaned[i1:], order, settings.smoothing_width, grid.h)
    target_norm = float(target @ target)
    if target_norm == 0.0:
        raise ObservabilityError("消去历史后的观测恒为零")

    def model(theta: FloatArray) -> FloatArray:
        kernel = kernel_family.to_kernel(theta)
        weights = product_weights(kernel, sub_grid)
        total = np.zeros(sub_grid.N + 1)
        for index, k in enumerate(active):
            mode = solve_second_kind(
                None, float(lam[k]), forcing[index], sub_grid, weights
            )
            total += phi[k] * mode.values
        return total

    def misfit(theta: FloatArray) -> float:
        try:
            prediction = _transform(
                model(theta), order, settings.smoothing_width, grid.h
            )
        except (FracMemoryError, ArithmeticError, ValueError):
            return _PENALTY
        value = float(np.sum((prediction - target) ** 2) / target_norm)
        return value if math.isfinite(value) else _PENALTY

    logger = get_logger()
    executor = ModeExecutor(threads)
    starts = kernel_family.start_grid(settings.grid_points)
    screen = executor.map(misfit, starts, "参数网格筛选")
    ranking = sorted(range(len(starts)), key=lambda i: (screen[i], i))
    candidates = [starts[i] for i in ranking[: settings.polish_count]]

    def polish(theta0: FloatArray) -> Tuple[FloatArray, float, bool]:
        outcome = minimize(
            misfit,
            theta0,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 4000, "maxfev": 8000},
        )
        return np.asarray(outcome.x), float(outcome.fun), bool(outcome.success)

    polished = executor.map(polish, candidates, "单纯形精修")
    best_index = min(range(len(polished)), key=lambda i: (polished[i][1], i))
    theta, best_misfit, success = polished[best_index]
    converged = success and best_misfit <= settings.misfit_tolerance
    warnings: List[str] = []
    if not converged:
        message = f"优化未收敛到容差: 残差 {best_misfit:.3e}，返回最优候选"
        logger.warning(message)
        warnings.append(message)

    parameters: Dict[str, object] = dict(kernel_family.parameters(theta))
    parameters.update(
        {
            "family": family,
            "derivative_order": order,
            "misfit": best_misfit,
            "converged": converged,
            "history_method": method,
        }
    )
    kernel = kernel_family.to_kernel(theta)
    times = sub_grid.times[1:]
    return RecoveryReport(
        kind="functional",
        times=times.copy(),
        values=np.asarray(kernel(times), dtype=float),
        residuals={0: best_misfit},
        parameters=parameters,
        warnings=warnings,
        diagnostics={"screened": len(starts), "active_modes": (active + 1).tolist()},
    )
