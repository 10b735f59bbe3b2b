import numpy as np
import pytest

from src.infrastructure.errors.exceptions import DomainError
from src.service.experiment.noise import inject_noise


# 测试同一 seed 给出相同噪声
def test_reproducible():
    data = np.sin(np.linspace(0.0, 3.0, 200))
    first = inject_noise(data, 0.01, seed=42)
    second = inject_noise(data, 0.01, seed=42)
    assert np.array_equal(first, second)
    assert not np.array_equal(first, inject_noise(data, 0.01, seed=43))


def test_noise_scale():
    data = 5.0 * np.ones((2, 20000))
    noisy = inject_noise(data, 0.01, seed=0)
    assert np.std(noisy - data) == pytest.approx(0.05, rel=0.05)
    assert noisy.shape == data.shape


def test_zero_level_copies():
    data = np.arange(4.0)
    noisy = inject_noise(data, 0.0)
    assert np.array_equal(noisy, data)
    assert noisy is not data


def test_negative_level():
    with pytest.raises(DomainError):
        inject_noise(np.ones(3), -0.1)
