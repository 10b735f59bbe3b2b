import threading
import time

import pytest

from src.core.executor.mode_executor import (
    THREADS_ENV,
    ModeExecutor,
    resolve_threads,
)


# 测试结果按输入顺序返回
def test_map_preserves_order():
    executor = ModeExecutor(max_workers=4)

    def slow_square(k):
        time.sleep(0.01 * (5 - k))
        return k * k

    assert executor.map(slow_square, list(range(5))) == [0, 1, 4, 9, 16]
    summary = executor.last_summary
    assert summary is not None
    assert summary.task_count == 5
    assert summary.max_workers == 4


# 测试单线程时在调用线程内执行
def test_single_thread_runs_inline():
    executor = ModeExecutor(max_workers=1)
    caller = threading.get_ident()
    idents = executor.map(lambda _: threading.get_ident(), [1, 2, 3])
    assert idents == [caller] * 3


def test_workers_bounded_by_items():
    executor = ModeExecutor(max_workers=8)
    executor.map(lambda x: x, [1, 2])
    assert executor.last_summary.max_workers == 2


def test_empty_items():
    executor = ModeExecutor(max_workers=4)
    assert executor.map(lambda x: x, []) == []


# 测试任务异常向上传播
def test_failure_propagates():
    executor = ModeExecutor(max_workers=3)

    def fail_on_two(k):
        if k == 2:
            raise ArithmeticError("模态 2 失败")
        return k

    with pytest.raises(ArithmeticError, match="模态 2"):
        executor.map(fail_on_two, [1, 2, 3])


# 测试线程数解析优先级
def test_resolve_threads(monkeypatch, mocker):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_threads(5) == 5
    assert resolve_threads() == 3
    assert resolve_threads(0) == 3

    monkeypatch.setenv(THREADS_ENV, "abc")
    mocker.patch("os.cpu_count", return_value=6)
    assert resolve_threads() == 6

    monkeypatch.delenv(THREADS_ENV)
    mocker.patch("os.cpu_count", return_value=None)
    assert resolve_threads() == 1
