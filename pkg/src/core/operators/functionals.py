"""观测泛函 Φ 及其模态系数 Φ_k = Φ(v_k)"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy.integrate import trapezoid

from src.core.operators.spectral_operator import SpectralOperator
from src.infrastructure.errors.exceptions import PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.utils.numerics import FloatArray

SUBINTERVAL_POINTS = 2049


class ObservationFunctional:
    """观测泛函基类"""

    kind: str = "abstract"

    def coefficients(self, operator: SpectralOperator) -> FloatArray:
        raise NotImplementedError

    def to_spec(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class PointValue(ObservationFunctional):
    """Φ(v) = v(x₀)"""

    x0: float
    kind = "point"

    def coefficients(self, operator: SpectralOperator) -> FloatArray:
        if not 0.0 < self.x0 < operator.length:
            raise PreconditionError(
                f"观测点必须位于区间内部: x0={self.x0}, L={operator.length}"
            )
        return operator.eigenfunctions(np.array([self.x0]))[:, 0]

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "x0": self.x0}


@dataclass(frozen=True)
class SubintervalMean(ObservationFunctional):
    """Φ(v) = (1/(b-a)) ∫_a^b v dx"""

    a: float
    b: float
    kind = "mean"

    def __post_init__(self) -> None:
        if not 0.0 <= self.a < self.b:
            raise PreconditionError(f"需要 0 ≤ a < b: a={self.a}, b={self.b}")

    def coefficients(self, operator: SpectralOperator) -> FloatArray:
        if self.b > operator.length:
            raise PreconditionError(f"子区间超出定义域: b={self.b}")
        width = self.b - self.a
        if operator.is_analytic:
            length = operator.length
            k = np.arange(1, operator.mode_count + 1, dtype=float)
            phase = k * np.pi / length
            return (
                np.sqrt(2.0 / length)
                * (np.cos(phase * self.a) - np.cos(phase * self.b))
                / (phase * width)
            )
        x = np.linspace(self.a, self.b, SUBINTERVAL_POINTS)
        return np.asarray(trapezoid(operator.eigenfunctions(x), x, axis=1) / width)

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "b": self.b}


def functional_coefficients(
    operator: SpectralOperator, functional: ObservationFunctional
) -> FloatArray:
    """Φ_k，k = 1..K；全部为零时记录可观测性警告"""
    coefficients = np.asarray(functional.coefficients(operator), dtype=float)
    if not np.any(np.abs(coefficients) > 1e-14):
        get_logger().warning(f"观测泛函 {functional.to_spec()} 零化了前 K 个模态")
    return coefficients


def build_functional(spec: Dict[str, Any]) -> ObservationFunctional:
    kind = str(spec.get("kind", "point"))
    if kind == "point":
        return PointValue(float(spec["x0"]))
    if kind == "mean":
        return SubintervalMean(float(spec["a"]), float(spec["b"]))
    raise PreconditionError(f"未知的观测泛函类型: {kind!r}")
