"""由特征值恢复分布阶测度的原子

λ_k = Σ_j κ_j (μ_k + η)^{β_j}。按指数从大到小逐个剥离原子：尾部模态上
log λ 对 log μ 的斜率给出 β̂，余量在低模态上给出下一个原子的初值，
然后对全部原子做联合最小二乘（相对残差）。开启平移搜索时，η 与原子交替
求解：高半段模态拟合原子，Ψ(η) = Σ κ_j (μ_1 + η)^{β_j} = λ_1 用二分求根。
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, least_squares

from src.core.inverse.kernel_recovery import recover_product
from src.core.inverse.settings import DEFAULT_SETTINGS, RegularizationSettings
from src.infrastructure.errors.exceptions import (
    InconsistencyError,
    ModelOrderError,
    PreconditionError,
)
from src.infrastructure.logging.logger import get_logger
from src.models.entities import DistributedMeasure, ObservationWindow, RecoveryReport
from src.utils.numerics import FloatArray

MIN_EXPONENT = 1e-6
MAX_ATOMS = 4
SHIFT_ITERATIONS = 50

Atoms = List[Tuple[float, float]]


@dataclass
class MeasureRecovery:
    """恢复出的原子测度、平移量与各阶剥离残差"""

    measure: DistributedMeasure
    eta: float = 0.0
    residual_history: List[float] = field(default_factory=list)
    report: Optional[RecoveryReport] = None

    @property
    def atoms(self) -> Atoms:
        return list(self.measure.atoms)


def _loglog_fit(values: FloatArray, nu: FloatArray) -> Tuple[float, float]:
    """log values 对 log nu 的直线拟合，返回 (斜率, 系数)"""
    slope, intercept = np.polyfit(np.log(nu), np.log(values), 1)
    return float(slope), float(math.exp(intercept))


def _predict(atoms: Atoms, nu: FloatArray) -> FloatArray:
    beta = np.array([b for b, _ in atoms])
    kappa = np.array([k for _, k in atoms])
    return np.asarray(np.power.outer(nu, beta) @ kappa, dtype=float)


def _relative_residual(lam: FloatArray, prediction: FloatArray) -> float:
    return float(np.sqrt(np.mean((prediction / lam - 1.0) ** 2)))


def _next_atom(lam: FloatArray, nu: FloatArray, atoms: Atoms) -> Tuple[float, float]:
    remainder = lam - _predict(atoms, nu)
    lower = slice(0, max(3, nu.size // 2))
    positive = remainder[lower] > 0.0
    ceiling = min(b for b, _ in atoms)
    if np.count_nonzero(positive) >= 3:
        slope, scale = _loglog_fit(remainder[lower][positive], nu[lower][positive])
        beta = float(np.clip(slope, MIN_EXPONENT, max(ceiling - 1e-3, MIN_EXPONENT)))
        return beta, max(scale, 1e-12)
    return max(0.5 * ceiling, MIN_EXPONENT), max(abs(float(remainder[0])), 1e-12)


def _fit(
    lam: FloatArray,
    mu: FloatArray,
    atoms: Atoms,
    eta: float,
    eta_bounds: Optional[Tuple[float, float]],
) -> Tuple[Atoms, float, float]:
    """固定原子数的联合最小二乘；eta_bounds 为 None 时 η 固定"""
    n = len(atoms)
    x0 = [b for b, _ in atoms] + [k for _, k in atoms]
    lower = [MIN_EXPONENT] * n + [0.0] * n
    upper = [1.0] * n + [np.inf] * n
    if eta_bounds is not None:
        x0.append(float(np.clip(eta, eta_bounds[0], eta_bounds[1])))
        lower.append(eta_bounds[0])
        upper.append(eta_bounds[1])

    def unpack(x: FloatArray) -> Tuple[Atoms, float]:
        shift = float(x[2 * n]) if eta_bounds is not None else eta
        return list(zip(x[:n].tolist(), x[n : 2 * n].tolist())), shift

    def residual(x: FloatArray) -> FloatArray:
        candidate, shift = unpack(x)
        return _predict(candidate, mu + shift) / lam - 1.0

    start = np.clip(np.array(x0), lower, upper)
    outcome = least_squares(
        residual,
        start,
        bounds=(lower, upper),
        method="trf",
        x_scale="jac",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=2000 * (2 * n + 1),
    )
    fitted, shift = unpack(outcome.x)
    fitted = sorted(fitted, key=lambda atom: atom[0])
    return fitted, shift, _relative_residual(lam, _predict(fitted, mu + shift))


def _peel(
    lam: FloatArray,
    mu: FloatArray,
    max_atoms: int,
    tolerance: float,
    eta_bounds: Optional[Tuple[float, float]] = None,
) -> Tuple[Atoms, float, List[float]]:
    tail = max(3, lam.size // 4)
    slope, scale = _loglog_fit(lam[-tail:], mu[-tail:])
    if not 0.0 < slope <= 1.0 + 1e-6:
        raise InconsistencyError(
            f"尾部斜率 {slope:.6f} 不在 (0, 1] 内，数据与分布阶模型不符",
            {"slope": slope},
        )
    guesses: Atoms = [(min(slope, 1.0), scale)]
    history: List[float] = []
    logger = get_logger()
    for count in range(1, max_atoms + 1):
        if count > 1:
            guesses.append(_next_atom(lam, mu, guesses))
        initial = _relative_residual(lam, _predict(guesses, mu))
        if eta_bounds is None and initial <= tolerance:
            atoms, shift, value = sorted(guesses), 0.0, initial
        else:
            atoms, shift, value = _fit(lam, mu, guesses, 0.0, eta_bounds)
        history.append(value)
        logger.debug(f"{count} 个原子: 相对残差 {value:.3e}")
        if value <= tolerance:
            return atoms, shift, history
        if count > 1 and value >= history[-2]:
            raise ModelOrderError(
                f"增加到 {count} 个原子残差不再下降，原子数超出可分辨范围",
                {"residuals": history},
            )
    raise ModelOrderError(
        f"{max_atoms} 个原子后相对残差仍为 {history[-1]:.3e}",
        {"residuals": history},
    )


def _as_measure(atoms: Atoms) -> DistributedMeasure:
    """去掉零权重原子，合并重合的指数"""
    merged: dict[float, float] = {}
    for exponent, weight in atoms:
        if weight > 0.0:
            merged[exponent] = merged.get(exponent, 0.0) + weight
    if not merged:
        raise InconsistencyError("拟合得到的原子权重全为零")
    return DistributedMeasure(atoms=tuple(sorted(merged.items())))


def _validate(lam: FloatArray, mu: FloatArray) -> None:
    if lam.shape != mu.shape or lam.ndim != 1:
        raise PreconditionError("λ_k 与 μ_k 的长度必须一致")
    if lam.size < 4:
        raise PreconditionError("至少需要 4 个模态")
    if np.any(np.diff(mu) <= 0.0) or mu[0] <= 0.0:
        raise PreconditionError("μ_k 必须为正且严格递增")
    if np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
        raise PreconditionError("λ_k 必须为正的有限数")
    if mu[-1] / mu[0] < 100.0:
        get_logger().warning(
            f"μ_k 只跨越 {math.log10(mu[-1] / mu[0]):.2f} 个数量级，"
            "尾部斜率估计可能不准"
        )


def recover_distributed_measure(
    eigenvalues: Sequence[float],
    base_eigenvalues: Sequence[float],
    shift_search: bool = False,
    max_atoms: int = MAX_ATOMS,
    tolerance: float = 1e-8,
    eta_upper: Optional[float] = None,
) -> MeasureRecovery:
    """剥离原子测度；shift_search 时同时求平移量 η"""
    lam = np.asarray(eigenvalues, dtype=float)
    mu = np.asarray(base_eigenvalues, dtype=float)
    _validate(lam, mu)
    if not 1 <= max_atoms <= MAX_ATOMS:
        raise PreconditionError(f"max_atoms 必须在 1..{MAX_ATOMS} 之间")
    logger = get_logger()

    if not shift_search:
        atoms, _, history = _peel(lam, mu, max_atoms, tolerance)
        return MeasureRecovery(_as_measure(atoms), 0.0, history)

    lower = -mu[0] + 1e-8 * mu[0]
    upper = float(eta_upper) if eta_upper is not None else float(mu[-1])
    if upper <= lower:
        raise PreconditionError("η 的搜索上界必须大于 -μ_1")
    atoms, eta, history = _peel(lam, mu, max_atoms, tolerance, (lower, upper))

    upper_half = slice(lam.size // 2, lam.size)
    for iteration in range(SHIFT_ITERATIONS):
        atoms, _, _ = _fit(lam[upper_half], mu[upper_half], atoms, eta, None)

        def mismatch(shift: float, fitted: Atoms = atoms) -> float:
            return float(_predict(fitted, np.array([mu[0] + shift]))[0] - lam[0])

        if mismatch(lower) * mismatch(upper) > 0.0:
            raise InconsistencyError(
                f"Ψ(η) = λ_1 在 ({lower:.3e}, {upper:.3e}] 内无解",
                {"lambda_1": float(lam[0])},
            )
        updated = float(bisect(mismatch, lower, upper, xtol=1e-14, maxiter=400))
        change = abs(updated - eta)
        eta = updated
        if change <= 1e-12 * (1.0 + abs(eta)):
            logger.debug(f"η 交替迭代 {iteration + 1} 次收敛: η = {eta:.12g}")
            break
    else:
        logger.warning(f"η 交替迭代 {SHIFT_ITERATIONS} 次未收敛，返回最后一次估计")

    atoms, _, _ = _fit(lam, mu, atoms, eta, None)
    history.append(_relative_residual(lam, _predict(atoms, mu + eta)))
    return MeasureRecovery(_as_measure(atoms), eta, history)


def recover_kernel_and_measure(
    window: ObservationWindow,
    base_eigenvalues: Sequence[float],
    settings: RegularizationSettings = DEFAULT_SETTINGS,
    threads: Optional[int] = None,
    shift_search: bool = False,
) -> RecoveryReport:
    """先恢复规范化的核与 λ_k，再由 (λ_k, μ_k) 剥离测度；测度与核共用规范常数"""
    product = recover_product(window, settings, threads)
    mu = np.asarray(base_eigenvalues, dtype=float)
    recovered = product.parameters["eigenvalues"]
    modes = [k for k in sorted(recovered) if recovered[k] is not None]
    if any(k > mu.size for k in modes):
        raise PreconditionError("μ_k 的个数少于被激发的模态数")
    lam = np.array([recovered[k] for k in modes])
    mu_used = mu[np.array(modes) - 1]
    recovery = recover_distributed_measure(lam, mu_used, shift_search=shift_search)

    parameters = dict(product.parameters)
    parameters.update(
        {
            "atoms": [list(atom) for atom in recovery.atoms],
            "eta": recovery.eta,
            "measure_modes": modes,
        }
    )
    diagnostics = dict(product.diagnostics)
    diagnostics["peeling_residuals"] = recovery.residual_history
    report = RecoveryReport(
        kind="kernel_measure",
        times=product.times,
        values=product.values,
        gauge_constant=product.gauge_constant,
        gauge_time=product.gauge_time,
        residuals=product.residuals,
        unreliable_nodes=product.unreliable_nodes,
        parameters=parameters,
        warnings=list(product.warnings),
        diagnostics=diagnostics,
    )
    recovery.report = report
    return report
