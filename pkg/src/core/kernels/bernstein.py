"""Bernstein 表示

完全单调核可写成 M(t) = ∫ e^{-tτ} q'(τ) dτ。幂律与调和幂律核的密度有闭式：

    q'(τ) = c sin(πα)/π · (τ - τ_min)^{-α},  τ > τ_min

其中幂律 τ_min = 0，调和幂律 τ_min = λ。
"""

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.integrate import quad

from src.core.kernels.memory_kernel import MemoryKernel, PowerLawKernel, TemperedKernel
from src.infrastructure.errors.exceptions import (
    ContourError,
    DomainError,
    UnsupportedVariantError,
)
from src.utils.numerics import FloatArray


@dataclass(frozen=True)
class BernsteinRepresentation:
    """谱密度 q'(τ) = scale · (τ - tau_min)^{-exponent}"""

    scale: float
    exponent: float
    tau_min: float = 0.0
    epsrel: float = 1e-11
    limit: int = 200

    def density(self, tau: Any) -> Any:
        tau = np.asarray(tau, dtype=float)
        if np.any(tau <= self.tau_min):
            raise DomainError(f"密度只在 (τ_min, ∞) 上定义, τ_min={self.tau_min}")
        values = self.scale * (tau - self.tau_min) ** (-self.exponent)
        return float(values) if values.ndim == 0 else values

    def reconstruct(self, t: float) -> float:
        """数值求 ∫ e^{-tτ} q'(τ) dτ"""
        if not t > 0.0:
            raise DomainError(f"重构需要 t > 0: {t}")
        lower = self.tau_min
        # 端点奇异段用代数权重 (τ - τ_min)^{-exponent} 精确处理
        head, _ = quad(
            lambda tau: self.scale * np.exp(-t * tau),
            lower,
            lower + 1.0,
            weight="alg",
            wvar=(-self.exponent, 0.0),
            epsrel=self.epsrel,
            limit=self.limit,
        )
        tail, _ = quad(
            lambda tau: self.density(tau) * np.exp(-t * tau),
            lower + 1.0,
            np.inf,
            epsrel=self.epsrel,
            limit=self.limit,
        )
        total = float(head + tail)
        if not np.isfinite(total):
            raise ContourError(f"Bernstein 重构积分发散: t={t}")
        return total

    def reconstruct_many(self, times: FloatArray) -> FloatArray:
        return np.array([self.reconstruct(float(t)) for t in np.ravel(times)])

    def inverse_moment(self, delta: float) -> float:
        """∫_{τ_min+δ}^∞ q'(τ)/τ dτ，对每个 δ > 0 有限"""
        if not delta > 0.0:
            raise DomainError(f"δ 必须为正: {delta}")
        value, _ = quad(
            lambda tau: self.density(tau) / tau,
            self.tau_min + delta,
            np.inf,
            epsrel=1e-9,
            limit=self.limit,
        )
        if not np.isfinite(value):
            raise ContourError(f"∫ q'(τ)/τ 在 δ={delta} 处不收敛")
        return float(value)


def bernstein_representation(kernel: MemoryKernel) -> BernsteinRepresentation:
    """幂律与调和幂律核的 Bernstein 密度"""
    if isinstance(kernel, PowerLawKernel):
        scale = kernel.c * np.sin(np.pi * kernel.alpha) / np.pi
        return BernsteinRepresentation(float(scale), kernel.alpha, 0.0)
    if isinstance(kernel, TemperedKernel):
        scale = kernel.c * np.sin(np.pi * kernel.alpha) / np.pi
        return BernsteinRepresentation(float(scale), kernel.alpha, kernel.lam)
    raise UnsupportedVariantError(
        f"Bernstein 表示只支持 power_law 与 tempered, 实际为 {kernel.family}"
    )
