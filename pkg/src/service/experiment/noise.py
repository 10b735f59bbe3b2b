"""加性高斯噪声，标准差为 level·max|data|，同一 seed 给出相同的噪声流"""

from typing import Optional

import numpy as np

from src.infrastructure.errors.exceptions import DomainError
from src.utils.numerics import FloatArray


def inject_noise(
    data: FloatArray, level: float, seed: Optional[int] = None
) -> FloatArray:
    if level < 0.0:
        raise DomainError(f"噪声水平必须非负: {level}")
    data = np.asarray(data, dtype=float)
    if level == 0.0:
        return data.copy()
    sigma = level * float(np.max(np.abs(data))) if data.size else 0.0
    rng = np.random.default_rng(seed)
    return data + rng.normal(0.0, sigma, size=data.shape)
