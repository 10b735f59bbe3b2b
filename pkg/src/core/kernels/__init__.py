"""记忆核：族、变换、Bernstein 表示与 Sonine 伴随"""

from src.core.kernels.bernstein import BernsteinRepresentation, bernstein_representation
from src.core.kernels.exponential_sum import ExponentialSum, fit_nonnegative
from src.core.kernels.memory_kernel import (
    DistributedOrderKernel,
    MemoryKernel,
    PowerLawKernel,
    TabulatedKernel,
    TemperedKernel,
    build_kernel,
    eval_kernel,
    kernel_primitives,
    laplace_kernel,
)
from src.core.kernels.monotonicity import check_complete_monotonicity
from src.core.kernels.sonine import (
    SoninePartner,
    analytic_sonine_partner,
    sonine_moments,
    sonine_partner,
)

__all__ = [
    "BernsteinRepresentation",
    "DistributedOrderKernel",
    "ExponentialSum",
    "MemoryKernel",
    "PowerLawKernel",
    "SoninePartner",
    "TabulatedKernel",
    "TemperedKernel",
    "analytic_sonine_partner",
    "bernstein_representation",
    "build_kernel",
    "check_complete_monotonicity",
    "eval_kernel",
    "fit_nonnegative",
    "kernel_primitives",
    "laplace_kernel",
    "sonine_moments",
    "sonine_partner",
]
