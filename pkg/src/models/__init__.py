"""领域模型层

本模块包含正问题与反问题共用的数值实体。
"""

from src.models.entities import (
    DeconvolutionResult,
    DistributedMeasure,
    DistributedOrderMeasure,
    ModeTrajectory,
    MonotonicityReport,
    ObservationWindow,
    RecoveryReport,
    RunManifest,
    SimulationResult,
    SourceModel,
    TimeGrid,
)

__all__ = [
    "DeconvolutionResult",
    "DistributedMeasure",
    "DistributedOrderMeasure",
    "ModeTrajectory",
    "MonotonicityReport",
    "ObservationWindow",
    "RecoveryReport",
    "RunManifest",
    "SimulationResult",
    "SourceModel",
    "TimeGrid",
]
