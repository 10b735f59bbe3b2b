from src.infrastructure.monitoring.run_monitor import RunMonitor, StageTiming

__all__ = ["RunMonitor", "StageTiming"]
