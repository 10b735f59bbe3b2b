from src.infrastructure.errors.error_handler import (
    ErrorCategory,
    ErrorHandler,
    ErrorInfo,
    ErrorSeverity,
)
from src.infrastructure.errors.exceptions import (
    ConfigError,
    ContourError,
    DomainError,
    EigenSolverError,
    FracMemoryError,
    IllConditionedError,
    InconsistencyError,
    ModelOrderError,
    ModeSolveError,
    NumericalError,
    ObservabilityError,
    PoleError,
    PreconditionError,
    StepSizeError,
    UnsupportedVariantError,
)

__all__ = [
    "ErrorCategory",
    "ErrorHandler",
    "ErrorInfo",
    "ErrorSeverity",
    "ConfigError",
    "ContourError",
    "DomainError",
    "EigenSolverError",
    "FracMemoryError",
    "IllConditionedError",
    "InconsistencyError",
    "ModelOrderError",
    "ModeSolveError",
    "NumericalError",
    "ObservabilityError",
    "PoleError",
    "PreconditionError",
    "StepSizeError",
    "UnsupportedVariantError",
]
