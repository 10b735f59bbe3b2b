"""Mittag-Leffler 函数 E_α(z)，α ∈ (0,1]，z ≤ 0"""

import math

import numpy as np
from scipy.special import gammaln

from src.core.laplace.contour import DEFAULT_CONTOUR, ContourSpec, contour_invert
from src.infrastructure.errors.exceptions import DomainError

SERIES_RADIUS = 5.0
SERIES_TERMS = 200
# 级数最大项超过此值时抵消误差过大，改走围道
_CANCELLATION_LIMIT = 1e4


def _series(alpha: float, z: float) -> float | None:
    if z == 0.0:
        return 1.0
    n = np.arange(SERIES_TERMS, dtype=float)
    log_terms = n * math.log(abs(z)) - gammaln(alpha * n + 1.0)
    if np.max(log_terms) > math.log(_CANCELLATION_LIMIT) or log_terms[-1] > -40.0:
        return None
    signs = np.where((n % 2 == 1) & (z < 0.0), -1.0, 1.0)
    return float(np.sum(signs * np.exp(log_terms)))


def mittag_leffler(
    alpha: float, z: float, spec: ContourSpec = DEFAULT_CONTOUR
) -> float:
    """E_α(z) = Σ z^n / Γ(αn+1)

    |z| ≤ 5 用对数空间级数，否则反演 s^{α-1}/(s^α - z) 于 t = 1。
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"α 必须位于 (0,1]: {alpha}")
    z = float(z)
    if z > 0.0:
        raise DomainError(f"只支持非正实参数: z={z}")
    if alpha == 1.0:
        return math.exp(z)
    if abs(z) <= SERIES_RADIUS:
        value = _series(alpha, z)
        if value is not None:
            return value
    return contour_invert(
        lambda s: s ** (alpha - 1.0) / (s**alpha - z), 1.0, spec
    )
