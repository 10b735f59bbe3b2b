"""反问题：核、乘积、历史、参数族与分布阶测度的恢复"""

from src.core.inverse.functional_recovery import (
    FAMILIES,
    KernelFamily,
    derivative_order,
    recover_kernel_from_functional,
)
from src.core.inverse.history_recovery import (
    history_design,
    recover_history,
    tikhonov_solve,
)
from src.core.inverse.kernel_recovery import recover_kernel, recover_product
from src.core.inverse.measure_recovery import (
    MeasureRecovery,
    recover_distributed_measure,
    recover_kernel_and_measure,
)
from src.core.inverse.settings import DEFAULT_SETTINGS, RegularizationSettings
from src.core.inverse.window import (
    ShiftedMode,
    continue_history,
    eliminate_history,
    fit_exponential_surrogate,
    shift_origin,
)

__all__ = [
    "DEFAULT_SETTINGS",
    "FAMILIES",
    "KernelFamily",
    "MeasureRecovery",
    "RegularizationSettings",
    "ShiftedMode",
    "continue_history",
    "derivative_order",
    "eliminate_history",
    "fit_exponential_surrogate",
    "history_design",
    "recover_distributed_measure",
    "recover_history",
    "recover_kernel",
    "recover_kernel_and_measure",
    "recover_product",
    "shift_origin",
    "tikhonov_solve",
]
