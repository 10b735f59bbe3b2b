"""时间域求解器：乘积积分卷积、第二类推进与第一类正则化反卷积"""

from src.core.volterra.deconvolution import (
    convolution_matrix,
    deconvolve_first_kind,
    discrepancy_epsilon,
    estimate_noise,
)
from src.core.volterra.product_integration import (
    ProductWeights,
    apply_weights,
    kernel_hat_samples,
    mode_residual,
    product_weights,
    solve_second_kind,
    weighted_convolve,
)

__all__ = [
    "ProductWeights",
    "apply_weights",
    "convolution_matrix",
    "deconvolve_first_kind",
    "discrepancy_epsilon",
    "estimate_noise",
    "kernel_hat_samples",
    "mode_residual",
    "product_weights",
    "solve_second_kind",
    "weighted_convolve",
]
