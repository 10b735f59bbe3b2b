"""领域模型层 - 定义数值实体

本模块定义了正问题与反问题共用的数据实体：
- TimeGrid: 带 t0/t1 标记的均匀时间网格
- ModeTrajectory: 单个模态的时间序列
- DistributedMeasure / DistributedOrderMeasure: 指数上的测度（原子或密度）
- SourceModel: 各模态的源项系数及间隙结构
- SimulationResult: 正问题求解结果
- ObservationWindow: [t0, T] 上的观测数据
- DeconvolutionResult: 第一类卷积方程的正则化解
- MonotonicityReport: 完全单调性检查报告
- RecoveryReport: 反问题恢复报告
- RunManifest: 运行清单
"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.infrastructure.errors.exceptions import DomainError, PreconditionError
from src.utils.numerics import FloatArray, gauss_legendre_unit

SOURCE_STRUCTURES = ("free", "gap", "partitioned_gap")


@dataclass(frozen=True)
class TimeGrid:
    """均匀时间网格

    节点 t_n = n*h, n = 0..N；obs_start_index 对应 t0，gap_end_index 对应 t1。
    """

    T: float
    N: int
    obs_start_index: Optional[int] = None
    gap_end_index: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.T > 0.0:
            raise DomainError(f"时间区间长度必须为正: T={self.T}")
        if self.N < 1:
            raise DomainError(f"网格单元数必须为正: N={self.N}")
        i0, i1 = self.obs_start_index, self.gap_end_index
        if (i0 is None) != (i1 is None):
            raise PreconditionError("t0 与 t1 标记必须同时给出")
        if i0 is not None and i1 is not None and not 0 < i0 < i1 < self.N:
            raise PreconditionError(
                f"需要 0 < t0 < t1 < T 的网格标记, 实际为 {i0}, {i1}, N={self.N}"
            )

    @classmethod
    def from_times(
        cls, T: float, N: int, t0: Optional[float] = None, t1: Optional[float] = None
    ) -> "TimeGrid":
        """按时间值构造，标记取最近的网格节点"""
        h = T / N
        i0 = None if t0 is None else int(round(t0 / h))
        i1 = None if t1 is None else int(round(t1 / h))
        return cls(T=T, N=N, obs_start_index=i0, gap_end_index=i1)

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> FloatArray:
        return np.arange(self.N + 1, dtype=float) * self.h

    @property
    def has_markers(self) -> bool:
        return self.obs_start_index is not None

    @property
    def t0(self) -> float:
        self.require_markers()
        return float(self.obs_start_index) * self.h  # type: ignore[arg-type]

    @property
    def t1(self) -> float:
        self.require_markers()
        return float(self.gap_end_index) * self.h  # type: ignore[arg-type]

    def require_markers(self) -> Tuple[int, int]:
        """返回 (t0 下标, t1 下标)，缺失时报错"""
        if self.obs_start_index is None or self.gap_end_index is None:
            raise PreconditionError("该操作需要带 t0/t1 标记的时间网格")
        return self.obs_start_index, self.gap_end_index

    def shifted(self, start_index: int) -> "TimeGrid":
        """以 start_index 为新原点的子网格，步长不变"""
        if not 0 <= start_index < self.N:
            raise PreconditionError(f"平移起点越界: {start_index}")
        cells = self.N - start_index
        return TimeGrid(T=cells * self.h, N=cells)


@dataclass
class ModeTrajectory:
    """单个模态在网格上的取值"""

    grid: TimeGrid
    values: FloatArray
    mode: Optional[int] = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.N + 1,):
            raise PreconditionError(
                f"轨迹长度 {self.values.shape} 与网格节点数 {self.grid.N + 1} 不符"
            )
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("轨迹包含非有限值")


@dataclass(frozen=True)
class DistributedMeasure:
    """(0,1] 上指数的非负测度

    atoms 为 (指数, 权重) 对，指数严格递增；density 为 (0,1) 上的非负函数，
    用 quadrature_order 点 Gauss–Legendre 求积。
    """

    atoms: Tuple[Tuple[float, float], ...] = ()
    density: Optional[Callable[[FloatArray], FloatArray]] = None
    quadrature_order: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "atoms", tuple((float(e), float(w)) for e, w in self.atoms)
        )
        exponents = [e for e, _ in self.atoms]
        for exponent, weight in self.atoms:
            if not 0.0 < exponent <= 1.0:
                raise DomainError(f"原子指数必须位于 (0,1]: {exponent}")
            if not weight > 0.0:
                raise DomainError(f"原子权重必须为正: {weight}")
        if any(b <= a for a, b in zip(exponents, exponents[1:])):
            raise PreconditionError("原子指数必须严格递增")
        if self.quadrature_order < 1:
            raise DomainError("求积阶数必须为正")
        if not self.atoms and self.density is None:
            raise PreconditionError("测度为空：至少需要一个原子或密度")
        if self.density is not None:
            values = self._density_values()
            if np.any(values < 0.0):
                raise DomainError("密度必须非负")
            if not self.atoms and not np.any(values > 0.0):
                raise PreconditionError("密度恒为零且无原子，测度为空")

    def _density_values(self) -> FloatArray:
        assert self.density is not None
        nodes, _ = gauss_legendre_unit(self.quadrature_order)
        return np.asarray(self.density(nodes), dtype=float) * np.ones_like(nodes)

    def nodes_and_weights(self) -> Tuple[FloatArray, FloatArray]:
        """把测度展开为 (指数, 权重) 的离散表示：原子精确，密度走求积"""
        exponents = [e for e, _ in self.atoms]
        weights = [w for _, w in self.atoms]
        if self.density is not None:
            nodes, quad_weights = gauss_legendre_unit(self.quadrature_order)
            exponents.extend(nodes.tolist())
            weights.extend((quad_weights * self._density_values()).tolist())
        return np.asarray(exponents, dtype=float), np.asarray(weights, dtype=float)

    @property
    def max_exponent(self) -> float:
        exponents, weights = self.nodes_and_weights()
        return float(np.max(exponents[weights > 0.0]))


@dataclass(frozen=True)
class DistributedOrderMeasure(DistributedMeasure):
    """分布阶核的阶数测度 p(α)"""


@dataclass
class SourceModel:
    """各模态源项系数 f_k(t_n)

    values 形状为 (K, N+1)，节点值代表左闭单元 [t_n, t_{n+1}) 上的常数。
    """

    grid: TimeGrid
    values: FloatArray
    structure: str = "free"
    blocks: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[1] != self.grid.N + 1:
            raise PreconditionError("源项的时间维度与网格不符")
        if self.structure not in SOURCE_STRUCTURES:
            raise PreconditionError(f"未知的源项结构: {self.structure}")
        if self.structure != "free" and not self.is_gap_honest():
            raise PreconditionError("间隙源项在 (t0,t1) 内必须恒为零")

    @property
    def mode_count(self) -> int:
        return int(self.values.shape[0])

    def gap_slice(self) -> slice:
        i0, i1 = self.grid.require_markers()
        return slice(i0 + 1, i1)

    def is_gap_honest(self) -> bool:
        """(t0,t1) 内部节点上源项是否严格为零"""
        return bool(np.all(self.values[:, self.gap_slice()] == 0.0))

    def history_part(self) -> FloatArray:
        """t0 及之前的部分，之后置零"""
        i0, _ = self.grid.require_markers()
        part = np.zeros_like(self.values)
        part[:, : i0 + 1] = self.values[:, : i0 + 1]
        return part

    def window_part(self) -> FloatArray:
        """t1 及之后的部分，之前置零"""
        _, i1 = self.grid.require_markers()
        part = np.zeros_like(self.values)
        part[:, i1:] = self.values[:, i1:]
        return part

    def has_history(self) -> bool:
        i0, _ = self.grid.require_markers()
        return bool(np.any(self.values[:, : i0 + 1] != 0.0))


@dataclass
class SimulationResult:
    """正问题结果：各模态轨迹 u_k(t_n)"""

    grid: TimeGrid
    modes: FloatArray
    initial_coefficients: FloatArray
    eigenvalues: FloatArray
    residuals: FloatArray
    operator: Any = None

    @property
    def mode_count(self) -> int:
        return int(self.modes.shape[0])

    def trajectory(self, mode: int) -> ModeTrajectory:
        """按 1 起始的模态编号取轨迹"""
        return ModeTrajectory(self.grid, self.modes[mode - 1], mode=mode)

    def field(self, x: FloatArray, time_indices: Sequence[int]) -> FloatArray:
        """重构 u(t, x) = Σ u_k(t) v_k(x)，返回形状 (len(time_indices), len(x))"""
        if self.operator is None:
            raise PreconditionError("重构空间场需要谱算子")
        basis = self.operator.eigenfunctions(np.asarray(x, dtype=float))
        return np.asarray(self.modes[:, list(time_indices)].T @ basis, dtype=float)

    def tail_bound(self, decay: Callable[[int], float]) -> float:
        """截断尾项上界 Σ_{k>K} |u_k(0)|，decay(k) 由调用者给出"""
        total, k = 0.0, self.mode_count + 1
        while True:
            term = abs(decay(k))
            total += term
            if term < 1e-16 * max(total, 1e-300) or k > 100 * self.mode_count + 1000:
                return total
            k += 1


@dataclass
class ObservationWindow:
    """[t0, T] 上的观测

    data 形状为 (K, N+1)（逐模态）或 (N+1,)（标量泛函观测），t0 之前的值不参与计算。
    history_trajectory 在合成实验中给出历史部分 Y 的真值。
    """

    grid: TimeGrid
    data: FloatArray
    source: SourceModel
    history_trajectory: Optional[FloatArray] = None
    known_zero_history: bool = False

    def __post_init__(self) -> None:
        self.grid.require_markers()
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape[-1] != self.grid.N + 1:
            raise PreconditionError("观测数据与网格节点数不符")
        i0, _ = self.grid.require_markers()
        if not np.all(np.isfinite(self.data[..., i0:])):
            raise PreconditionError("观测窗口 [t0, T] 内存在非有限值")
        if not self.source.is_gap_honest():
            raise PreconditionError("源项在间隙 (t0,t1) 内不为零")

    @property
    def is_scalar(self) -> bool:
        return self.data.ndim == 1


@dataclass
class DeconvolutionResult:
    """第一类 Volterra 方程的 Lavrentiev 正则化解

    values[m] 是核在 t_m = m*h 处的帽函数加权平均。
    """

    times: FloatArray
    values: FloatArray
    epsilon: float
    residual_norm: float
    unreliable_nodes: List[int] = field(default_factory=lambda: [0, 1])


@dataclass
class MonotonicityReport:
    """完全单调性检查：违例为 (n, t, (-1)^n M^(n)(t))"""

    n_max: int
    tolerance: float
    violations: List[Tuple[int, float, float]] = field(default_factory=list)

    @property
    def is_monotone(self) -> bool:
        return not self.violations

    def orders(self) -> List[int]:
        return sorted({n for n, _, _ in self.violations})


@dataclass
class RecoveryReport:
    """反问题恢复报告"""

    kind: str
    times: FloatArray = field(default_factory=lambda: np.zeros(0))
    values: FloatArray = field(default_factory=lambda: np.zeros(0))
    gauge_constant: float = 1.0
    gauge_time: Optional[float] = None
    residuals: Dict[int, float] = field(default_factory=dict)
    unreliable_nodes: List[int] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    generated_at: Optional[datetime] = None

    def __post_init__(self) -> None:
        if self.generated_at is None:
            self.generated_at = datetime.now()
        if not self.gauge_constant > 0.0:
            raise PreconditionError("规范常数必须为正")
        if any(not np.isfinite(r) for r in self.residuals.values()):
            raise PreconditionError("残差必须有限")


@dataclass
class RunManifest:
    """运行清单：配置哈希、版本、文件校验和与耗时"""

    command: str
    config_hash: str
    version: str
    files: Dict[str, str] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    peak_memory_mb: float = 0.0
    created_at: Optional[str] = None

    def __post_init__(self) -> None:
        if self.created_at is None:
            self.created_at = datetime.now().isoformat(timespec="seconds")
