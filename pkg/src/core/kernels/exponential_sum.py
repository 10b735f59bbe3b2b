"""非负指数和：完全单调函数的离散 Bernstein 表示

    F(t) ≈ Σ_j c_j e^{-s_j (t - origin)},  c_j ≥ 0

衰减率取 0 加对数网格。非负约束本身起正则化作用，用于带噪数据上的核拟合
和间隙历史的延拓。
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import nnls

from src.infrastructure.errors.exceptions import DomainError
from src.utils.numerics import FloatArray

_SERIES_LIMIT = 1e-4


def rate_grid(
    low: float, high: float, per_decade: int = 8, include_zero: bool = True
) -> FloatArray:
    """[low, high] 上的对数网格，可选附加衰减率 0"""
    if not 0.0 < low < high:
        raise DomainError(f"衰减率区间必须满足 0 < low < high: [{low}, {high}]")
    count = max(int(np.ceil(per_decade * np.log10(high / low))) + 1, 2)
    rates = np.geomspace(low, high, count)
    if include_zero:
        rates = np.concatenate([[0.0], rates])
    return rates


def exponential_columns(
    times: FloatArray, rates: Sequence[float], origin: float = 0.0
) -> FloatArray:
    return np.exp(-np.outer(np.asarray(times, dtype=float) - origin, rates))


def hat_sample_columns(rates: Sequence[float], step: float, count: int) -> FloatArray:
    """e^{-s t} 的帽函数平均，与 kernel_hat_samples 同口径

    x_0 = (z - 1 + e^{-z}) / z²，x_m = e^{-s(m-1)h} (1 - e^{-z})² / z²，z = s h
    """
    rates = np.asarray(rates, dtype=float)
    z = rates * step
    safe = np.where(z > 0.0, z, 1.0)
    head = np.where(
        z > _SERIES_LIMIT,
        (safe + np.expm1(-safe)) / safe**2,
        0.5 - z / 6.0 + z**2 / 24.0,
    )
    factor = np.where(z > 0.0, (np.expm1(-safe) / safe) ** 2, 1.0)
    offsets = np.arange(count - 1, dtype=float) * step
    body = np.exp(-np.outer(offsets, rates)) * factor
    return np.vstack([head, body])


@dataclass(frozen=True)
class ExponentialSum:
    rates: FloatArray
    weights: FloatArray
    residual_norm: float

    def __call__(self, times: FloatArray, origin: float = 0.0) -> FloatArray:
        return exponential_columns(times, self.rates, origin) @ self.weights

    def hat_samples(self, step: float, count: int) -> FloatArray:
        return hat_sample_columns(self.rates, step, count) @ self.weights

    @property
    def support(self) -> FloatArray:
        return self.rates[self.weights > 0.0]


def fit_nonnegative(
    design: FloatArray,
    rhs: FloatArray,
    rates: Sequence[float],
    max_iterations: Optional[int] = None,
) -> ExponentialSum:
    """列归一化后的 NNLS；design 的第 j 列对应衰减率 rates[j]"""
    design = np.asarray(design, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if design.shape != (rhs.size, rates.size):
        raise DomainError(
            f"设计矩阵形状 {design.shape} 与数据 {rhs.size}、衰减率 {rates.size} 不符"
        )
    norms = np.linalg.norm(design, axis=0)
    active = norms > 0.0
    weights = np.zeros(rates.size)
    residual = float(np.linalg.norm(rhs))
    if np.any(active):
        scaled = design[:, active] / norms[active]
        maxiter = max_iterations or 50 * int(np.count_nonzero(active))
        solution, residual = nnls(scaled, rhs, maxiter=maxiter)
        weights[active] = solution / norms[active]
    return ExponentialSum(rates=rates, weights=weights, residual_norm=float(residual))
