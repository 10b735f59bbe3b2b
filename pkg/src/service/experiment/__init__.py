from src.service.experiment.experiment_runner import (
    ExperimentRunner,
    RunOutcome,
    SyntheticData,
    true_kernel_samples,
)
from src.service.experiment.noise import inject_noise

__all__ = [
    "ExperimentRunner",
    "RunOutcome",
    "SyntheticData",
    "inject_noise",
    "true_kernel_samples",
]
