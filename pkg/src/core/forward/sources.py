"""结构化源项

源项系数在左闭单元 [t_n, t_{n+1}) 上取常数 f_n，因此 (1∗f)(t_n) = h Σ_{j<n} f_j。
间隙源项在 (t0, t1) 内的网格节点上恒为零；分块源项
f(t) = Σ_i ψ_i(t) w_i 的各块支撑互不重叠且从 t1 开始依次排列。
"""

from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.infrastructure.errors.exceptions import PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.models.entities import SourceModel, TimeGrid
from src.utils.numerics import FloatArray

Block = Tuple[FloatArray, FloatArray]


def _index_range(grid: TimeGrid, start: float, end: float) -> Tuple[int, int]:
    first = int(round(start / grid.h))
    last = int(round(end / grid.h))
    if not 0 <= first < last <= grid.N + 1:
        raise PreconditionError(f"剖面区间 [{start}, {end}) 不在网格内或为空")
    return first, last


def indicator_profile(grid: TimeGrid, start: float, end: float) -> FloatArray:
    """[start, end) 的示性函数"""
    first, last = _index_range(grid, start, end)
    profile = np.zeros(grid.N + 1)
    profile[first:last] = 1.0
    return profile


def ramp_profile(
    grid: TimeGrid, start: float, end: float, slope: float = 1.0
) -> FloatArray:
    """[start, end) 上的 slope·(t - start)，在支撑起点处为零"""
    first, last = _index_range(grid, start, end)
    profile = np.zeros(grid.N + 1)
    profile[first:last] = slope * (grid.times[first:last] - grid.times[first])
    return profile


def hat_profile(grid: TimeGrid, start: float, end: float) -> FloatArray:
    """[start, end) 上从 1 线性降到 0 的剖面，起点取值非零"""
    first, last = _index_range(grid, start, end)
    profile = np.zeros(grid.N + 1)
    profile[first:last] = np.linspace(1.0, 0.0, last - first, endpoint=False)
    return profile


def function_profile(
    grid: TimeGrid, fn: Callable[[FloatArray], FloatArray], start: float, end: float
) -> FloatArray:
    """在 [start, end) 上采样任意函数"""
    first, last = _index_range(grid, start, end)
    profile = np.zeros(grid.N + 1)
    profile[first:last] = np.asarray(fn(grid.times[first:last]), dtype=float)
    return profile


PROFILES: Dict[str, Callable[..., FloatArray]] = {
    "indicator": indicator_profile,
    "ramp": ramp_profile,
    "hat": hat_profile,
}


def build_profile(grid: TimeGrid, spec: Dict[str, Any]) -> FloatArray:
    kind = str(spec.get("profile", "indicator"))
    if kind not in PROFILES:
        raise PreconditionError(f"未知的时间剖面: {kind!r}")
    start, end = float(spec["start"]), float(spec["end"])
    if kind == "ramp":
        return ramp_profile(grid, start, end, float(spec.get("slope", 1.0)))
    return PROFILES[kind](grid, start, end)


def make_partitioned_source(
    blocks: Sequence[Block],
    grid: TimeGrid,
    history: Optional[FloatArray] = None,
) -> SourceModel:
    """f_k(t) = Σ_i ψ_i(t)·(w_i)_k，可叠加 t0 之前的历史源项"""
    i0, i1 = grid.require_markers()
    if not blocks:
        raise PreconditionError("分块源项至少需要一个块")
    mode_vectors = [np.asarray(w, dtype=float).ravel() for _, w in blocks]
    mode_count = mode_vectors[0].size
    if any(v.size != mode_count for v in mode_vectors):
        raise PreconditionError("各块的模态向量长度不一致")

    values = np.zeros((mode_count, grid.N + 1))
    metadata: List[Dict[str, Any]] = []
    previous_end = -1
    for index, ((profile, _), vector) in enumerate(zip(blocks, mode_vectors)):
        profile = np.asarray(profile, dtype=float)
        if profile.shape != (grid.N + 1,):
            raise PreconditionError(f"第 {index} 块剖面长度与网格不符")
        support = np.nonzero(profile)[0]
        if support.size == 0:
            raise PreconditionError(f"第 {index} 块剖面恒为零")
        start, end = int(support[0]), int(support[-1])
        if start < i1:
            raise PreconditionError(
                f"第 {index} 块支撑起点 t={grid.times[start]:.6g} 落在 t1 之前"
                f" (间隙 ({grid.t0:.6g}, {grid.t1:.6g}))"
            )
        if start <= previous_end:
            raise PreconditionError(f"第 {index} 块与前一块支撑重叠或顺序颠倒")
        if not np.any(vector != 0.0):
            raise PreconditionError(f"第 {index} 块的模态向量为零")
        previous_end = end
        values += np.outer(vector, profile)
        metadata.append(
            {"start_index": start, "end_index": end, "mode_vector": vector.tolist()}
        )

    rank = int(np.linalg.matrix_rank(np.vstack(mode_vectors)))
    if rank < mode_count:
        get_logger().warning(
            f"分块模态向量只张成 {rank}/{mode_count} 维子空间，"
            "乘积恢复只在被激发的子空间上唯一"
        )
    if history is not None:
        history = np.atleast_2d(np.asarray(history, dtype=float))
        if history.shape != values.shape:
            raise PreconditionError("历史源项形状与分块源项不符")
        if np.any(history[:, i0 + 1 :] != 0.0):
            raise PreconditionError("历史源项必须只在 [0, t0] 上非零")
        values = values + history
    return SourceModel(grid, values, structure="partitioned_gap", blocks=metadata)


def make_gap_source(
    grid: TimeGrid, history: Optional[FloatArray], window: Optional[FloatArray]
) -> SourceModel:
    """历史部分在 [0, t0]，观测部分在 [t1, T]，间隙内恒零"""
    i0, i1 = grid.require_markers()
    parts = [
        np.atleast_2d(np.asarray(p, dtype=float))
        for p in (history, window)
        if p is not None
    ]
    if not parts:
        raise PreconditionError("间隙源项需要历史或窗口部分")
    values = np.zeros_like(parts[0])
    if history is not None:
        history = np.atleast_2d(np.asarray(history, dtype=float))
        if np.any(history[:, i0 + 1 :] != 0.0):
            raise PreconditionError("历史源项必须只在 [0, t0] 上非零")
        values = values + history
    if window is not None:
        window = np.atleast_2d(np.asarray(window, dtype=float))
        if np.any(window[:, :i1] != 0.0):
            raise PreconditionError("窗口源项必须只在 [t1, T] 上非零")
        values = values + window
    return SourceModel(grid, values, structure="gap")


def leading_support_indices(source: SourceModel) -> List[Optional[int]]:
    """每个模态在 t1 之后源项首个非零节点；未被激发时为 None"""
    _, i1 = source.grid.require_markers()
    indices: List[Optional[int]] = []
    for row in source.values:
        nonzero = np.nonzero(row[i1:])[0]
        indices.append(int(nonzero[0]) + i1 if nonzero.size else None)
    return indices


def excitation_energy(source: SourceModel) -> FloatArray:
    """窗口部分的 h Σ f_k²"""
    return source.grid.h * np.sum(source.window_part() ** 2, axis=1)
