import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import psutil


@dataclass
class StageTiming:
    """阶段耗时"""

    name: str
    seconds: float
    rss_mb: float


@dataclass
class RunMonitor:
    """运行监控器

    记录每个流水线阶段的墙钟时间与进程常驻内存峰值，
    结果写入 RunManifest。
    """

    started_at: float = field(default_factory=time.time)
    stages: Dict[str, StageTiming] = field(default_factory=dict)
    peak_rss_mb: float = 0.0
    _process: Optional[psutil.Process] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self._process is None:
            self._process = psutil.Process()
        self._sample_memory()

    def _sample_memory(self) -> float:
        assert self._process is not None
        rss_mb = float(self._process.memory_info().rss) / (1024 * 1024)
        self.peak_rss_mb = max(self.peak_rss_mb, rss_mb)
        return rss_mb

    def record_stage(self, name: str, seconds: float) -> None:
        """记录阶段耗时；同名阶段累加"""
        rss_mb = self._sample_memory()
        if name in self.stages:
            previous = self.stages[name]
            self.stages[name] = StageTiming(name, previous.seconds + seconds, rss_mb)
        else:
            self.stages[name] = StageTiming(name, seconds, rss_mb)

    def timings(self) -> Dict[str, float]:
        """阶段名到秒数的映射，附带总耗时"""
        result = {name: round(stage.seconds, 6) for name, stage in self.stages.items()}
        result["total"] = round(time.time() - self.started_at, 6)
        return result
