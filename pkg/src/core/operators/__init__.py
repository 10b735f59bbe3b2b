"""谱算子、分布分数幂与观测泛函"""

from src.core.operators.functionals import (
    ObservationFunctional,
    PointValue,
    SubintervalMean,
    build_functional,
    functional_coefficients,
)
from src.core.operators.spectral_operator import (
    FractionalSpectrum,
    SpectralOperator,
    build_measure,
    build_operator,
    dirichlet_eigenpairs,
    distributed_eigenvalues,
    fractional_eigenvalues,
    sturm_liouville_fd,
)

__all__ = [
    "FractionalSpectrum",
    "ObservationFunctional",
    "PointValue",
    "SpectralOperator",
    "SubintervalMean",
    "build_functional",
    "build_measure",
    "build_operator",
    "dirichlet_eigenpairs",
    "distributed_eigenvalues",
    "fractional_eigenvalues",
    "functional_coefficients",
    "sturm_liouville_fd",
]
