"""完全单调记忆核

四类核：幂律、调和（指数截断）幂律、分布阶与表格核。每个核提供
点值、拉普拉斯变换以及一阶、二阶原函数：

    P1(t) = ∫_0^t M(s) ds,    P2(t) = ∫_0^t P1(s) ds

乘积积分权重只依赖 P1/P2，奇异性由解析原函数精确处理。
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Tuple, Union

import numpy as np
from scipy.special import gammainc, rgamma

from src.infrastructure.errors.exceptions import DomainError, PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.models.entities import DistributedOrderMeasure
from src.utils.numerics import FloatArray

ArrayLike = Union[float, Iterable[float], FloatArray]

# 对数-对数插值中指数 p 与 -1、-2 的判等容差
_EXPONENT_TOL = 1e-12


def _as_times(t: ArrayLike, allow_zero: bool = False) -> Tuple[FloatArray, bool]:
    array = np.asarray(t, dtype=float)
    bad = array < 0.0 if allow_zero else array <= 0.0
    if np.any(bad) or not np.all(np.isfinite(array)):
        raise DomainError(f"核的时间参数必须为正: min={float(np.min(array))}")
    return array, array.ndim == 0


def _wrap(values: FloatArray, scalar: bool) -> Any:
    return float(values) if scalar else values


def _check_laplace_argument(s: complex) -> complex:
    s = complex(s)
    if s.imag == 0.0 and s.real <= 0.0:
        raise DomainError(f"拉普拉斯变量位于分支切割 (-∞, 0] 上: s={s}")
    return s


class MemoryKernel(ABC):
    """记忆核基类"""

    family: str = "abstract"

    def __call__(self, t: ArrayLike) -> Any:
        times, scalar = _as_times(t)
        return _wrap(self._evaluate(times), scalar)

    def primitive(self, t: ArrayLike) -> Any:
        """P1(t) = ∫_0^t M"""
        times, scalar = _as_times(t, allow_zero=True)
        return _wrap(self._primitive(times), scalar)

    def second_primitive(self, t: ArrayLike) -> Any:
        """P2(t) = ∫_0^t P1"""
        times, scalar = _as_times(t, allow_zero=True)
        return _wrap(self._second_primitive(times), scalar)

    def laplace(self, s: complex) -> complex:
        return self._laplace(_check_laplace_argument(s))

    @property
    def singular_at_origin(self) -> bool:
        """lim_{t→0+} M(t) = ∞"""
        return True

    @abstractmethod
    def _evaluate(self, t: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _primitive(self, t: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _second_primitive(self, t: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _laplace(self, s: complex) -> complex: ...

    @abstractmethod
    def scaled(self, factor: float) -> "MemoryKernel":
        """返回 factor·M"""

    @abstractmethod
    def to_spec(self) -> Dict[str, Any]:
        """序列化为配置字典"""


def _check_fraction(alpha: float, name: str = "alpha") -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"{name} 必须位于 (0,1): {alpha}")


def _check_positive(value: float, name: str) -> None:
    if not value > 0.0 or not np.isfinite(value):
        raise DomainError(f"{name} 必须为正: {value}")


@dataclass(frozen=True)
class PowerLawKernel(MemoryKernel):
    """M(t) = c t^{α-1} / Γ(α)"""

    c: float = 1.0
    alpha: float = 0.5
    family = "power_law"

    def __post_init__(self) -> None:
        _check_positive(self.c, "c")
        _check_fraction(self.alpha)

    def _evaluate(self, t: FloatArray) -> FloatArray:
        return self.c * t ** (self.alpha - 1.0) * rgamma(self.alpha)

    def _primitive(self, t: FloatArray) -> FloatArray:
        return self.c * t**self.alpha * rgamma(self.alpha + 1.0)

    def _second_primitive(self, t: FloatArray) -> FloatArray:
        return self.c * t ** (self.alpha + 1.0) * rgamma(self.alpha + 2.0)

    def _laplace(self, s: complex) -> complex:
        return complex(self.c * s ** (-self.alpha))

    def scaled(self, factor: float) -> "PowerLawKernel":
        return PowerLawKernel(self.c * factor, self.alpha)

    def to_spec(self) -> Dict[str, Any]:
        return {"family": self.family, "c": self.c, "alpha": self.alpha}


@dataclass(frozen=True)
class TemperedKernel(MemoryKernel):
    """M(t) = c t^{α-1} e^{-λt} / Γ(α)"""

    c: float = 1.0
    alpha: float = 0.5
    lam: float = 1.0
    family = "tempered"

    def __post_init__(self) -> None:
        _check_positive(self.c, "c")
        _check_fraction(self.alpha)
        _check_positive(self.lam, "lambda")

    def _evaluate(self, t: FloatArray) -> FloatArray:
        return (
            self.c
            * t ** (self.alpha - 1.0)
            * np.exp(-self.lam * t)
            * rgamma(self.alpha)
        )

    def _primitive(self, t: FloatArray) -> FloatArray:
        return self.c * self.lam ** (-self.alpha) * gammainc(self.alpha, self.lam * t)

    def _second_primitive(self, t: FloatArray) -> FloatArray:
        # ∫_0^t s M(s) ds = c α λ^{-α-1} P(α+1, λt)
        first_moment = (
            self.c
            * self.alpha
            * self.lam ** (-self.alpha - 1.0)
            * gammainc(self.alpha + 1.0, self.lam * t)
        )
        return t * self._primitive(t) - first_moment

    def _laplace(self, s: complex) -> complex:
        return complex(self.c * (s + self.lam) ** (-self.alpha))

    def scaled(self, factor: float) -> "TemperedKernel":
        return TemperedKernel(self.c * factor, self.alpha, self.lam)

    def to_spec(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "c": self.c,
            "alpha": self.alpha,
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class DistributedOrderKernel(MemoryKernel):
    """M(t) = ∫ t^{α-1}/Γ(α) dp(α)，原子精确求和，密度用 Gauss–Legendre"""

    measure: DistributedOrderMeasure
    family = "distributed_order"
    _exponents: FloatArray = field(init=False, repr=False, compare=False)
    _weights: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        exponents, weights = self.measure.nodes_and_weights()
        keep = weights > 0.0
        object.__setattr__(self, "_exponents", exponents[keep])
        object.__setattr__(self, "_weights", weights[keep])

    @classmethod
    def multiterm(
        cls, pairs: Iterable[Tuple[float, float]]
    ) -> "DistributedOrderKernel":
        """多项幂律核 Σ κ_i t^{α_i-1}/Γ(α_i)"""
        atoms = tuple(sorted((float(a), float(k)) for a, k in pairs))
        return cls(DistributedOrderMeasure(atoms=atoms))

    @property
    def singular_at_origin(self) -> bool:
        return bool(np.max(self._exponents) < 1.0)

    def _sum_terms(self, t: FloatArray, shift: float) -> FloatArray:
        # Σ w_i t^{α_i+shift-1} / Γ(α_i+shift)
        powers = np.power.outer(t, self._exponents + shift - 1.0)
        coefficients = self._weights * rgamma(self._exponents + shift)
        return np.asarray(powers @ coefficients, dtype=float)

    def _evaluate(self, t: FloatArray) -> FloatArray:
        return self._sum_terms(t, 0.0)

    def _primitive(self, t: FloatArray) -> FloatArray:
        return self._sum_terms(t, 1.0)

    def _second_primitive(self, t: FloatArray) -> FloatArray:
        return self._sum_terms(t, 2.0)

    def _laplace(self, s: complex) -> complex:
        return complex(np.sum(self._weights * s ** (-self._exponents)))

    def scaled(self, factor: float) -> "DistributedOrderKernel":
        _check_positive(factor, "factor")
        density = self.measure.density
        scaled_density = None
        if density is not None:

            def scaled_density(alpha: FloatArray) -> FloatArray:
                return factor * np.asarray(density(alpha), dtype=float)

        return DistributedOrderKernel(
            DistributedOrderMeasure(
                atoms=tuple((e, w * factor) for e, w in self.measure.atoms),
                density=scaled_density,
                quadrature_order=self.measure.quadrature_order,
            )
        )

    def to_spec(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "atoms": [list(atom) for atom in self.measure.atoms],
            "has_density": self.measure.density is not None,
            "quadrature_order": self.measure.quadrature_order,
        }


@dataclass(frozen=True, eq=False)
class TabulatedKernel(MemoryKernel):
    """表格核：节点 (t_a, M_a) 间按对数-对数线性插值

    每段为幂律 M(t) = M_a (t/t_a)^{p_a}；[0, t_0] 沿用首段幂律，要求 p_0 > -1。
    在 [t_0, t_last] 之外求值报错，原函数只在 [0, t_last] 上定义。
    """

    times: FloatArray
    values: FloatArray
    family = "tabulated"

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if times.size < 2 or times.shape != values.shape:
            raise PreconditionError("表格核至少需要两个等长的 (t, M) 节点")
        if np.any(times <= 0.0) or np.any(np.diff(times) <= 0.0):
            raise DomainError("表格核的时间节点必须为正且严格递增")
        if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
            raise DomainError("表格核的取值必须严格为正")
        if np.any(np.diff(values) > 0.0):
            get_logger().warning("表格核取值不是单调非增的，完全单调性不成立")
        log_t, log_m = np.log(times), np.log(values)
        slopes = np.diff(log_m) / np.diff(log_t)
        if not slopes[0] > -1.0:
            raise DomainError(f"首段幂指数 {slopes[0]:.4g} ≤ -1，核在 0 处不可积")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_slopes", slopes)
        node_p1, node_p2 = self._node_primitives()
        object.__setattr__(self, "_node_p1", node_p1)
        object.__setattr__(self, "_node_p2", node_p2)

    @classmethod
    def from_function(cls, fn: Any, times: ArrayLike) -> "TabulatedKernel":
        grid = np.asarray(times, dtype=float)
        return cls(grid, np.asarray(fn(grid), dtype=float))

    @classmethod
    def constant(cls, value: float, t_end: float) -> "TabulatedKernel":
        """M ≡ value，覆盖 (0, t_end]"""
        _check_positive(value, "value")
        _check_positive(t_end, "t_end")
        return cls(np.array([1e-9 * t_end, t_end]), np.array([value, value]))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TabulatedKernel":
        """读取两列 CSV (t, M(t))，允许表头与 # 注释"""
        table = np.genfromtxt(path, delimiter=",", comments="#")
        table = np.atleast_2d(table)
        if table.shape[1] < 2:
            raise PreconditionError(f"表格核文件需要两列: {path}")
        table = table[np.all(np.isfinite(table[:, :2]), axis=1), :2]
        zero_rows = table[:, 0] == 0.0
        if np.any(zero_rows):
            get_logger().warning(f"表格核文件 {path} 含 t=0 行，已跳过")
            table = table[~zero_rows]
        return cls(table[:, 0], table[:, 1])

    @property
    def singular_at_origin(self) -> bool:
        return bool(self._slopes[0] < 0.0)

    @property
    def t_first(self) -> float:
        return float(self.times[0])

    @property
    def t_last(self) -> float:
        return float(self.times[-1])

    def _segment_integrals(
        self, t: FloatArray, index: FloatArray
    ) -> Tuple[FloatArray, FloatArray]:
        """段 index 内从 t_a 到 t 的一阶、二阶积分增量"""
        t_a = self.times[index]
        m_a = self.values[index]
        p = self._slopes[index]
        ratio = t / t_a
        near_m1 = np.abs(p + 1.0) < _EXPONENT_TOL
        near_m2 = np.abs(p + 2.0) < _EXPONENT_TOL
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.log(ratio)
            safe1 = np.where(near_m1, 1.0, p + 1.0)
            safe2 = np.where(near_m2, 1.0, p + 2.0)
            inc1 = np.where(
                near_m1,
                m_a * t_a * log_ratio,
                m_a * t_a / safe1 * (ratio**safe1 - 1.0),
            )
            # ∫_{t_a}^t [P1(s) - P1(t_a)] ds
            general2 = m_a * t_a / safe1 * (
                t_a / safe2 * (ratio**safe2 - 1.0) - (t - t_a)
            )
            at_m1 = m_a * t_a * (t * log_ratio - (t - t_a))
            at_m2 = -m_a * t_a * (t_a * log_ratio - (t - t_a))
            inc2 = np.where(near_m1, at_m1, np.where(near_m2, at_m2, general2))
        return inc1, inc2

    def _node_primitives(self) -> Tuple[FloatArray, FloatArray]:
        p0 = self._slopes[0]
        t0, m0 = self.times[0], self.values[0]
        p1 = np.empty_like(self.times)
        p2 = np.empty_like(self.times)
        p1[0] = m0 * t0 / (p0 + 1.0)
        p2[0] = m0 * t0**2 / ((p0 + 1.0) * (p0 + 2.0))
        index = np.arange(self.times.size - 1)
        inc1, inc2 = self._segment_integrals(self.times[1:], index)
        for a in range(self.times.size - 1):
            h = self.times[a + 1] - self.times[a]
            p1[a + 1] = p1[a] + inc1[a]
            p2[a + 1] = p2[a] + p1[a] * h + inc2[a]
        return p1, p2

    def _locate(self, t: FloatArray) -> FloatArray:
        index = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(index, 0, self.times.size - 2)

    def _evaluate(self, t: FloatArray) -> FloatArray:
        if np.any(t < self.t_first) or np.any(t > self.t_last):
            raise DomainError(
                f"表格核不外推: 请求区间超出 [{self.t_first:.6g}, {self.t_last:.6g}]"
            )
        index = self._locate(t)
        return self.values[index] * (t / self.times[index]) ** self._slopes[index]

    def _check_coverage(self, t: FloatArray) -> None:
        if np.any(t > self.t_last * (1.0 + 1e-12)):
            raise DomainError(
                f"表格核只覆盖到 t={self.t_last:.6g}，卷积区间更长"
            )

    def _head(self, t: FloatArray) -> Tuple[FloatArray, FloatArray]:
        p0, t0, m0 = self._slopes[0], self.times[0], self.values[0]
        ratio = t / t0
        head1 = m0 * t0 / (p0 + 1.0) * ratio ** (p0 + 1.0)
        head2 = m0 * t0**2 / ((p0 + 1.0) * (p0 + 2.0)) * ratio ** (p0 + 2.0)
        return head1, head2

    def _primitive(self, t: FloatArray) -> FloatArray:
        self._check_coverage(t)
        t = np.minimum(t, self.t_last)
        index = self._locate(np.maximum(t, self.t_first))
        inc1, _ = self._segment_integrals(np.maximum(t, self.t_first), index)
        head1, _ = self._head(t)
        return np.where(t < self.t_first, head1, self._node_p1[index] + inc1)

    def _second_primitive(self, t: FloatArray) -> FloatArray:
        self._check_coverage(t)
        t = np.minimum(t, self.t_last)
        clipped = np.maximum(t, self.t_first)
        index = self._locate(clipped)
        _, inc2 = self._segment_integrals(clipped, index)
        _, head2 = self._head(t)
        body = (
            self._node_p2[index]
            + self._node_p1[index] * (clipped - self.times[index])
            + inc2
        )
        return np.where(t < self.t_first, head2, body)

    def _laplace(self, s: complex) -> complex:
        # 近似：每个单元的质量集中在单元中点
        edges = np.concatenate(([0.0], self.times))
        masses = np.diff(np.concatenate(([0.0], self._node_p1)))
        midpoints = 0.5 * (edges[1:] + edges[:-1])
        return complex(np.sum(masses * np.exp(-s * midpoints)))

    def scaled(self, factor: float) -> "TabulatedKernel":
        _check_positive(factor, "factor")
        return TabulatedKernel(self.times.copy(), self.values * factor)

    def to_spec(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "nodes": int(self.times.size),
            "t_first": self.t_first,
            "t_last": self.t_last,
        }


def build_kernel(spec: Dict[str, Any]) -> MemoryKernel:
    """由配置字典构造核

    支持 family = power_law / tempered / distributed_order / tabulated / constant。
    """
    family = str(spec.get("family", "")).lower()
    if family == "power_law":
        return PowerLawKernel(float(spec.get("c", 1.0)), float(spec["alpha"]))
    if family == "tempered":
        return TemperedKernel(
            float(spec.get("c", 1.0)), float(spec["alpha"]), float(spec["lambda"])
        )
    if family == "distributed_order":
        return DistributedOrderKernel.multiterm(
            (float(a), float(k)) for a, k in spec["atoms"]
        )
    if family == "tabulated":
        return TabulatedKernel.from_csv(spec["path"])
    if family == "constant":
        return TabulatedKernel.constant(
            float(spec.get("value", 1.0)), float(spec.get("t_end", 1.0))
        )
    raise PreconditionError(f"未知的核类型: {family!r}")


def kernel_primitives(kernel: MemoryKernel, t: ArrayLike) -> Tuple[Any, Any, Any]:
    """同时返回 (M(t), P1(t), P2(t))"""
    return kernel(t), kernel.primitive(t), kernel.second_primitive(t)


def eval_kernel(kernel: MemoryKernel, t: ArrayLike) -> Any:
    """M(t)，t ≤ 0 报错"""
    return kernel(t)


def laplace_kernel(kernel: MemoryKernel, s: complex) -> complex:
    """M̂(s)，主分支，s ∈ (-∞, 0] 报错"""
    return kernel.laplace(s)
