"""通用数值工具"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import uniform_filter1d

FloatArray = NDArray[np.float64]


@lru_cache(maxsize=16)
def gauss_legendre_unit(order: int) -> Tuple[FloatArray, FloatArray]:
    """(0,1) 上的 Gauss–Legendre 节点与权重"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def moving_average(values: FloatArray, width: int) -> FloatArray:
    """滑动平均，边界取最近值"""
    if width <= 1:
        return np.asarray(values, dtype=float).copy()
    return np.asarray(
        uniform_filter1d(np.asarray(values, dtype=float), size=width, mode="nearest"),
        dtype=float,
    )


def central_derivative(values: FloatArray, step: float, order: int = 1) -> FloatArray:
    """四阶中心差分求 order 阶导数，边界退化为二阶"""
    result = np.asarray(values, dtype=float)
    for _ in range(order):
        derivative = np.gradient(result, step, edge_order=2)
        if result.size >= 5:
            derivative[2:-2] = (
                -result[4:] + 8.0 * result[3:-1] - 8.0 * result[1:-3] + result[:-4]
            ) / (12.0 * step)
        result = derivative
    return result


def relative_l2(estimate: FloatArray, reference: FloatArray) -> float:
    """相对 L2 误差"""
    reference = np.asarray(reference, dtype=float)
    norm = float(np.linalg.norm(reference))
    diff = float(np.linalg.norm(np.asarray(estimate, dtype=float) - reference))
    return diff / norm if norm > 0.0 else diff


def left_cumulative(values: FloatArray, step: float) -> FloatArray:
    """左矩形累积积分：结果[n] = h * sum(values[:n])"""
    values = np.asarray(values, dtype=float)
    result = np.zeros_like(values)
    result[..., 1:] = step * np.cumsum(values[..., :-1], axis=-1)
    return result
