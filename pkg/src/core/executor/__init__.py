from src.core.executor.mode_executor import (
    THREADS_ENV,
    ExecutionSummary,
    ModeExecutor,
    resolve_threads,
)

__all__ = ["THREADS_ENV", "ExecutionSummary", "ModeExecutor", "resolve_threads"]
