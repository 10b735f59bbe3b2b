"""一维椭圆算子 B_a = -d²/dx² - a 的 Dirichlet 谱数据及其分布分数幂

常系数势用闭式正弦模态，变系数势用二阶中心差分的三对角特征问题。
分布分数幂的特征值 λ_k = ∫ μ_k^β dϱ(β)。
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Union

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import eigh_tridiagonal

from src.infrastructure.errors.exceptions import (
    EigenSolverError,
    PreconditionError,
)
from src.infrastructure.logging.logger import get_logger
from src.models.entities import DistributedMeasure
from src.utils.numerics import FloatArray

Potential = Union[float, Callable[[FloatArray], FloatArray], FloatArray]

DEFAULT_MODE_COUNT = 16
RESOLUTION_FACTOR = 8


@dataclass(frozen=True)
class SpectralOperator:
    """算子的前 K 个 Dirichlet 特征对

    potential 为常数时特征函数取闭式 √(2/L) sin(kπx/L)；
    否则 mesh/vectors 保存有限差分特征向量（含两端零值），按线性插值求值。
    """

    length: float
    eigenvalues: FloatArray
    potential: Optional[float] = 0.0
    mesh: Optional[FloatArray] = None
    vectors: Optional[FloatArray] = None

    @property
    def mode_count(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def is_analytic(self) -> bool:
        return self.vectors is None

    def eigenfunctions(self, x: FloatArray) -> FloatArray:
        """形状 (K, len(x)) 的特征函数值"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.vectors is None:
            k = np.arange(1, self.mode_count + 1)[:, None]
            return np.sqrt(2.0 / self.length) * np.sin(k * np.pi * x / self.length)
        assert self.mesh is not None
        return np.vstack([np.interp(x, self.mesh, row) for row in self.vectors])

    def eigenfunction(self, k: int, x: FloatArray) -> FloatArray:
        """第 k 个（1 起始）特征函数"""
        if not 1 <= k <= self.mode_count:
            raise PreconditionError(f"模态编号越界: {k}")
        return self.eigenfunctions(x)[k - 1]


@dataclass(frozen=True)
class FractionalSpectrum:
    """分布分数幂 A_{ϱ,a} 的特征值"""

    base: SpectralOperator
    measure: DistributedMeasure
    eigenvalues: FloatArray


def dirichlet_eigenpairs(
    length: float, a: float = 0.0, mode_count: int = DEFAULT_MODE_COUNT
) -> SpectralOperator:
    """常数势：μ_k = (kπ/L)² - a"""
    if not length > 0.0:
        raise PreconditionError(f"区间长度必须为正: {length}")
    if mode_count < 1:
        raise PreconditionError(f"模态数必须为正: {mode_count}")
    if a > 0.0:
        raise PreconditionError(f"势函数必须非正: a={a}")
    k = np.arange(1, mode_count + 1, dtype=float)
    mu = (k * np.pi / length) ** 2 - a
    return SpectralOperator(length=length, eigenvalues=mu, potential=float(a))


def _sample_potential(potential: Potential, interior: FloatArray) -> FloatArray:
    if callable(potential):
        values = np.asarray(potential(interior), dtype=float) * np.ones_like(interior)
    else:
        samples = np.asarray(potential, dtype=float)
        if samples.ndim == 0:
            values = np.full_like(interior, float(samples))
        elif samples.size == interior.size:
            values = samples
        elif samples.size == interior.size + 2:
            values = samples[1:-1]
        else:
            raise PreconditionError(
                f"势函数采样长度 {samples.size} 与网格不符 ({interior.size} 个内点)"
            )
    return values


def sturm_liouville_fd(
    length: float,
    potential: Potential,
    mesh_size: int,
    mode_count: int = DEFAULT_MODE_COUNT,
) -> SpectralOperator:
    """-v'' - a v = μ v 的中心差分离散，Dirichlet 端点"""
    if not length > 0.0:
        raise PreconditionError(f"区间长度必须为正: {length}")
    if mode_count < 1:
        raise PreconditionError(f"模态数必须为正: {mode_count}")
    if mesh_size < RESOLUTION_FACTOR * mode_count:
        raise PreconditionError(
            f"网格过粗: mesh_size={mesh_size} < {RESOLUTION_FACTOR}·K"
            f"={RESOLUTION_FACTOR * mode_count}"
        )
    mesh = np.linspace(0.0, length, mesh_size + 1)
    h = length / mesh_size
    interior = mesh[1:-1]
    a = _sample_potential(potential, interior)
    if np.any(a > 0.0):
        raise PreconditionError(f"势函数必须非正: max a = {float(np.max(a)):.4g}")

    diagonal = 2.0 / h**2 - a
    off_diagonal = np.full(interior.size - 1, -1.0 / h**2)
    try:
        mu, vectors = eigh_tridiagonal(
            diagonal, off_diagonal, select="i", select_range=(0, mode_count - 1)
        )
    except (LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"三对角特征值求解失败: {exc}") from exc
    if mu.size < mode_count or not np.all(np.isfinite(mu)):
        raise EigenSolverError(f"只得到 {mu.size} 个有限特征值, 需要 {mode_count}")

    full = np.zeros((mode_count, mesh.size))
    full[:, 1:-1] = vectors.T
    norms = np.sqrt(h * np.sum(full**2, axis=1))
    full /= norms[:, None]
    signs = np.where(full[:, 1] < 0.0, -1.0, 1.0)
    full *= signs[:, None]
    get_logger().debug(
        f"有限差分特征问题求解完成: mesh={mesh_size}, μ_1={mu[0]:.8g}"
    )
    return SpectralOperator(
        length=length, eigenvalues=mu, potential=None, mesh=mesh, vectors=full
    )


def fractional_eigenvalues(mu: FloatArray, measure: DistributedMeasure) -> FloatArray:
    """λ(μ) = ∫ μ^β dϱ(β)，逐元素"""
    exponents, weights = measure.nodes_and_weights()
    if not np.any(weights > 0.0):
        raise PreconditionError("测度为空")
    mu = np.asarray(mu, dtype=float)
    return np.asarray(np.power.outer(mu, exponents) @ weights, dtype=float)


def distributed_eigenvalues(
    operator: SpectralOperator, measure: DistributedMeasure
) -> FractionalSpectrum:
    """分布分数幂的特征值序列"""
    lam = fractional_eigenvalues(operator.eigenvalues, measure)
    if np.any(np.diff(lam) < 0.0):
        get_logger().warning("分布分数幂特征值不是单调非减的")
    return FractionalSpectrum(base=operator, measure=measure, eigenvalues=lam)


def build_measure(spec: Optional[Dict[str, Any]]) -> DistributedMeasure:
    """由配置构造测度；缺省为 δ_1"""
    if not spec:
        return DistributedMeasure(atoms=((1.0, 1.0),))
    atoms = tuple((float(b), float(k)) for b, k in spec.get("atoms", []))
    density_name = spec.get("density")
    density = None
    if density_name == "uniform":
        scale = float(spec.get("density_scale", 1.0))

        def density(beta: FloatArray) -> FloatArray:
            return np.full_like(np.asarray(beta, dtype=float), scale)

    elif density_name is not None:
        raise PreconditionError(f"未知的测度密度: {density_name!r}")
    return DistributedMeasure(
        atoms=atoms,
        density=density,
        quadrature_order=int(spec.get("quadrature_order", 64)),
    )


def build_operator(spec: Dict[str, Any]) -> SpectralOperator:
    """由配置构造算子：常数势走闭式，采样势走有限差分"""
    length = float(spec.get("length", np.pi))
    mode_count = int(spec.get("mode_count", DEFAULT_MODE_COUNT))
    potential = spec.get("potential", 0.0)
    if isinstance(potential, (int, float)):
        return dirichlet_eigenpairs(length, float(potential), mode_count)
    mesh_size = int(spec.get("mesh_size", 512))
    if isinstance(potential, str):
        samples = np.atleast_2d(np.genfromtxt(potential, delimiter=",", comments="#"))
        samples = samples[np.all(np.isfinite(samples), axis=1)]
        x, a = samples[:, 0], samples[:, 1]

        def interpolated(points: FloatArray) -> FloatArray:
            return np.interp(points, x, a)

        return sturm_liouville_fd(length, interpolated, mesh_size, mode_count)
    return sturm_liouville_fd(length, np.asarray(potential), mesh_size, mode_count)


__all__ = [
    "DEFAULT_MODE_COUNT",
    "FractionalSpectrum",
    "SpectralOperator",
    "build_measure",
    "build_operator",
    "dirichlet_eigenpairs",
    "distributed_eigenvalues",
    "fractional_eigenvalues",
    "sturm_liouville_fd",
]
