"""反问题的正则化与判据设置"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

from src.core.kernels.exponential_sum import rate_grid
from src.infrastructure.errors.exceptions import DomainError


@dataclass(frozen=True)
class RegularizationSettings:
    """epsilon 为 None 时按偏差原则选取；noise 为 None 时由数据估计

    completely_monotone 为真时，带噪数据上的核由各模态方程联合拟合非负指数和；
    monotone_surrogate 为真时，符号确定的间隙历史用非负指数和延拓。
    """

    epsilon: Optional[float] = None
    noise: Optional[float] = None
    tikhonov: float = 1e-8
    spread_threshold: float = 0.05
    proportionality_tolerance: float = 1e-3
    energy_floor: float = 1e-12
    surrogate_rates: Tuple[float, ...] = field(
        default_factory=lambda: tuple(rate_grid(1e-2, 1e2).tolist())
    )
    surrogate_ridge: float = 1e-10
    monotone_surrogate: bool = True
    completely_monotone: bool = True
    smoothing_width: int = 5
    grid_points: int = 8
    polish_count: int = 4
    misfit_tolerance: float = 1e-8

    def __post_init__(self) -> None:
        if self.epsilon is not None and self.epsilon < 0.0:
            raise DomainError(f"epsilon 必须非负: {self.epsilon}")
        if self.noise is not None and self.noise < 0.0:
            raise DomainError(f"noise 必须非负: {self.noise}")
        if self.tikhonov < 0.0:
            raise DomainError(f"tikhonov 必须非负: {self.tikhonov}")
        if not self.surrogate_rates or min(self.surrogate_rates) < 0.0:
            raise DomainError("指数和替代模型的衰减率必须非负")
        if self.grid_points < 2 or self.polish_count < 1:
            raise DomainError("多起点网格至少 2 点，精修候选至少 1 个")


DEFAULT_SETTINGS = RegularizationSettings()
