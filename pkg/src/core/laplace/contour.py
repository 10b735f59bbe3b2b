"""围道数值拉普拉斯反演

双曲围道 z(u) = ω₂ + μ(1 + sin(iu - φ))，μ = scale / t，
对 u ∈ [-span, span] 用梯形公式：

    f(t) ≈ h/(2πi) Σ_k e^{z_k t} F(z_k) z'(u_k)

围道包住负实轴，适用于在 (-∞, ω₂] 之外解析的变换。
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.core.kernels.memory_kernel import MemoryKernel
from src.infrastructure.errors.exceptions import (
    ContourError,
    DomainError,
    PoleError,
    PreconditionError,
)

Transform = Callable[[complex], complex]

IMAG_TOLERANCE = 1e-8
_POLE_GUARD = 1e-300


@dataclass(frozen=True)
class ContourSpec:
    """围道参数：node_count 为半围道节点数"""

    node_count: int = 48
    vertex_offset: float = 0.0
    half_angle: float = math.pi / 2 + 1.1721
    scale: float = 12.0
    span: float = 2.5

    def __post_init__(self) -> None:
        if self.node_count < 8:
            raise DomainError(f"围道节点数至少为 8: {self.node_count}")
        if not math.pi / 2 < self.half_angle < math.pi:
            raise DomainError(f"半张角必须位于 (π/2, π): {self.half_angle}")
        if not self.scale > 0.0 or not self.span > 0.0:
            raise DomainError("围道尺度与参数区间长度必须为正")

    @property
    def step(self) -> float:
        return self.span / (self.node_count - 1)

    def nodes(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """返回 t 处的围道节点 z_k 与导数 z'(u_k)"""
        mu = self.scale / t
        phi = self.half_angle - math.pi / 2
        u = self.step * np.arange(-(self.node_count - 1), self.node_count)
        w = 1j * u - phi
        z = self.vertex_offset + mu * (1.0 + np.sin(w))
        dz = mu * 1j * np.cos(w)
        return z, dz


DEFAULT_CONTOUR = ContourSpec()


def contour_invert(
    transform: Transform, t: float, spec: ContourSpec = DEFAULT_CONTOUR
) -> float:
    """数值反演 F̂ 在 t > 0 处的值"""
    if not t > 0.0:
        raise DomainError(f"反演时间必须为正: t={t}")
    z, dz = spec.nodes(t)
    values = np.empty(z.size, dtype=complex)
    for index, node in enumerate(z):
        try:
            values[index] = complex(transform(complex(node)))
        except Exception as exc:
            raise ContourError(
                f"变换在围道节点 s={complex(node):.6g} 处求值失败: {exc}",
                {"node_index": index, "s": complex(node)},
            ) from exc
    total = spec.step / (2j * math.pi) * np.sum(np.exp(z * t) * values * dz)
    if not np.isfinite(total):
        raise ContourError(f"围道求和发散: t={t}", {"t": t})
    if abs(total.imag) >= IMAG_TOLERANCE * (1.0 + abs(total.real)):
        raise ContourError(
            f"反演结果虚部过大: Im={total.imag:.3e}, Re={total.real:.6g}",
            {"t": t, "imag": float(total.imag)},
        )
    return float(total.real)


def relaxation_hat(kernel: MemoryKernel, lam: float, s: complex) -> complex:
    """v + λ M∗v = 1 的拉普拉斯像 1 / (s (1 + λ M̂(s)))"""
    if lam < 0.0:
        raise PreconditionError(f"模态特征值必须非负: λ={lam}")
    s = complex(s)
    if lam == 0.0:
        if abs(s) < _POLE_GUARD:
            raise PoleError(f"分母在 s={s} 处为零", {"s": s})
        return 1.0 / s
    denominator = s * (1.0 + lam * kernel.laplace(s))
    if abs(denominator) < _POLE_GUARD:
        raise PoleError(f"分母在 s={s} 处为零", {"s": s})
    return 1.0 / denominator


def invert_relaxation(
    kernel: MemoryKernel, lam: float, t: float, spec: ContourSpec = DEFAULT_CONTOUR
) -> float:
    """围道反演得到模态松弛函数 v(t)"""
    return contour_invert(lambda s: relaxation_hat(kernel, lam, s), t, spec)
