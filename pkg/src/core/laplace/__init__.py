"""拉普拉斯反演与 Mittag-Leffler 函数"""

from src.core.laplace.contour import (
    DEFAULT_CONTOUR,
    ContourSpec,
    contour_invert,
    invert_relaxation,
    relaxation_hat,
)
from src.core.laplace.mittag_leffler import mittag_leffler

__all__ = [
    "DEFAULT_CONTOUR",
    "ContourSpec",
    "contour_invert",
    "invert_relaxation",
    "mittag_leffler",
    "relaxation_hat",
]
