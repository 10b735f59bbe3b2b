"""正问题：谱展开求解、结构化源项与观测"""

from src.core.forward.caputo import CaputoCheck, caputo_form, cell_convolve
from src.core.forward.simulator import mode_right_side, observe, simulate, zero_source
from src.core.forward.sources import (
    build_profile,
    excitation_energy,
    function_profile,
    hat_profile,
    indicator_profile,
    leading_support_indices,
    make_gap_source,
    make_partitioned_source,
    ramp_profile,
)

__all__ = [
    "CaputoCheck",
    "build_profile",
    "caputo_form",
    "cell_convolve",
    "excitation_energy",
    "function_profile",
    "hat_profile",
    "indicator_profile",
    "leading_support_indices",
    "make_gap_source",
    "make_partitioned_source",
    "mode_right_side",
    "observe",
    "ramp_profile",
    "simulate",
    "zero_source",
]
