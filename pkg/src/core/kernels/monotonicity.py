"""完全单调性检查"""

from typing import Optional

import numpy as np
from scipy.special import comb, poch, rgamma

from src.core.kernels.memory_kernel import (
    MemoryKernel,
    PowerLawKernel,
    TabulatedKernel,
    TemperedKernel,
)
from src.infrastructure.errors.exceptions import PreconditionError
from src.models.entities import MonotonicityReport, TimeGrid
from src.utils.numerics import FloatArray

FD_MAX_ORDER = 4
FD_RELATIVE_STEP = 0.01
DEFAULT_TOLERANCE = 1e-7


def _analytic_signed_derivative(
    c: float, alpha: float, lam: float, n: int, t: FloatArray
) -> FloatArray:
    # (-1)^n M^(n)(t) = c/Γ(α) e^{-λt} Σ_k C(n,k) (1-α)_k t^{α-1-k} λ^{n-k}
    total = np.zeros_like(t)
    for k in range(n + 1):
        total += comb(n, k) * poch(1.0 - alpha, k) * t ** (alpha - 1.0 - k) * lam ** (
            n - k
        )
    return c * rgamma(alpha) * np.exp(-lam * t) * total


def _stencil_signed_derivative(
    kernel: MemoryKernel, n: int, t: float
) -> Optional[float]:
    step = FD_RELATIVE_STEP * t
    offsets = (np.arange(n + 1) - 0.5 * n) * step
    points = t + offsets
    if np.any(points <= 0.0):
        return None
    if isinstance(kernel, TabulatedKernel) and (
        points[0] < kernel.t_first or points[-1] > kernel.t_last
    ):
        return None
    weights = np.array([(-1.0) ** (n - k) * comb(n, k) for k in range(n + 1)])
    values = np.asarray(kernel(points), dtype=float)
    return float((-1.0) ** n * np.dot(weights, values) / step**n)


def check_complete_monotonicity(
    kernel: MemoryKernel,
    n_max: int,
    grid: TimeGrid,
    tolerance: float = DEFAULT_TOLERANCE,
) -> MonotonicityReport:
    """在网格内点上检查 (-1)^n M^(n)(t) ≥ -tolerance, n = 0..n_max"""
    if n_max < 0:
        raise PreconditionError(f"n_max 必须非负: {n_max}")
    report = MonotonicityReport(n_max=n_max, tolerance=tolerance)
    times = grid.times[1:]

    analytic = isinstance(kernel, (PowerLawKernel, TemperedKernel))
    if not analytic and n_max > FD_MAX_ORDER:
        raise PreconditionError(
            f"有限差分检查最多到 {FD_MAX_ORDER} 阶, 请求 n_max={n_max}"
        )

    for n in range(n_max + 1):
        if analytic:
            lam = kernel.lam if isinstance(kernel, TemperedKernel) else 0.0
            signed = _analytic_signed_derivative(kernel.c, kernel.alpha, lam, n, times)
            for t, value in zip(times, signed):
                if value < -tolerance:
                    report.violations.append((n, float(t), float(value)))
            continue
        for t in times:
            if n == 0:
                if isinstance(kernel, TabulatedKernel) and not (
                    kernel.t_first <= t <= kernel.t_last
                ):
                    continue
                value: Optional[float] = float(kernel(float(t)))
            else:
                value = _stencil_signed_derivative(kernel, n, float(t))
            if value is not None and value < -tolerance:
                report.violations.append((n, float(t), value))
    return report
