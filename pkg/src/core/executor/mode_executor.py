"""逐模态并行执行器

模态求解与多起点优化分支彼此独立，用线程池并行；
结果按输入顺序返回，归并是确定性的。
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, TypeVar

from src.infrastructure.logging.logger import get_logger

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "FRACMEMORY_THREADS"


def resolve_threads(requested: Optional[int] = None) -> int:
    """线程数：显式参数 > 环境变量 > CPU 数"""
    if requested is not None and requested > 0:
        return requested
    env_value = os.environ.get(THREADS_ENV)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            get_logger().warning(f"{THREADS_ENV}={env_value!r} 不是整数，已忽略")
    return max(1, os.cpu_count() or 1)


@dataclass
class ExecutionSummary:
    task_count: int
    max_workers: int
    elapsed: float


class ModeExecutor:
    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = resolve_threads(max_workers)
        self.logger = get_logger()
        self.last_summary: Optional[ExecutionSummary] = None

    def map(
        self, fn: Callable[[T], R], items: Sequence[T], label: str = "任务"
    ) -> List[R]:
        """并行执行 fn，按 items 的顺序返回；任一任务失败则抛出其异常"""
        start_time = time.perf_counter()
        workers = min(self.max_workers, max(1, len(items)))
        if workers == 1:
            results = [fn(item) for item in items]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(fn, items))
        elapsed = time.perf_counter() - start_time
        self.last_summary = ExecutionSummary(len(items), workers, elapsed)
        self.logger.debug(
            f"{label}完成: 数量={len(items)}, 线程={workers}, 耗时={elapsed:.3f}秒"
        )
        return results
