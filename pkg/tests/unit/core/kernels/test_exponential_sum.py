"""测试非负指数和拟合"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.core.kernels.exponential_sum import (
    exponential_columns,
    fit_nonnegative,
    hat_sample_columns,
    rate_grid,
)
from src.infrastructure.errors.exceptions import DomainError


def _hat_average(rate, step, m):
    """(1/h)∫ φ_m(t) e^{-st} dt，φ_0 只取右半支"""

    def integrand(t):
        return max(0.0, 1.0 - abs(t - m * step) / step) * math.exp(-rate * t)

    if m == 0:
        value, _ = quad(integrand, 0.0, step)
    else:
        value, _ = quad(integrand, (m - 1) * step, (m + 1) * step, points=[m * step])
    return value / step


def test_rate_grid():
    rates = rate_grid(0.01, 100.0)
    assert rates[0] == 0.0
    assert rates[1] == pytest.approx(0.01)
    assert rates[-1] == pytest.approx(100.0)
    assert rates.size == 1 + 33
    assert rate_grid(1.0, 10.0, include_zero=False)[0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        rate_grid(1.0, 1.0)


@pytest.mark.parametrize("rate", [0.5, 3.0, 40.0])
def test_hat_sample_columns_match_quadrature(rate):
    step = 0.1
    columns = hat_sample_columns([rate], step, 5)
    expected = [_hat_average(rate, step, m) for m in range(5)]
    assert columns[:, 0] == pytest.approx(expected, rel=1e-9)


def test_hat_samples_of_constant():
    columns = hat_sample_columns([0.0, 1e-9], 0.05, 4)
    assert columns[:, 0] == pytest.approx([0.5, 1.0, 1.0, 1.0])
    assert columns[:, 1] == pytest.approx(columns[:, 0], rel=1e-8)


def test_series_branch_is_continuous():
    step = 0.01
    below, above = hat_sample_columns([0.99e-4 / step, 1.01e-4 / step], step, 1)[0]
    assert below == pytest.approx(above, rel=1e-5)


# 测试 NNLS 恢复稀疏的非负权重
def test_fit_nonnegative_recovers_weights():
    rates = np.array([0.0, 0.5, 2.0, 8.0])
    times = np.linspace(0.0, 5.0, 200)
    design = exponential_columns(times, rates)
    truth = np.array([0.2, 1.0, 0.0, 3.0])
    fit = fit_nonnegative(design, design @ truth, rates)
    assert fit.weights == pytest.approx(truth, abs=1e-8)
    assert fit.residual_norm < 1e-8
    assert fit.support == pytest.approx([0.0, 0.5, 8.0])
    assert fit(times) == pytest.approx(design @ truth, abs=1e-8)


def test_fit_nonnegative_keeps_weights_nonnegative():
    rates = np.array([0.5, 2.0])
    times = np.linspace(0.0, 3.0, 50)
    target = np.exp(-0.5 * times) - np.exp(-2.0 * times)
    fit = fit_nonnegative(exponential_columns(times, rates), target, rates)
    assert np.all(fit.weights >= 0.0)
    assert fit.residual_norm > 0.0


def test_zero_columns_are_skipped():
    rates = np.array([1.0, 2.0])
    design = np.column_stack([np.exp(-np.arange(4.0)), np.zeros(4)])
    fit = fit_nonnegative(design, 2.0 * design[:, 0], rates)
    assert fit.weights == pytest.approx([2.0, 0.0])


def test_shape_mismatch():
    with pytest.raises(DomainError):
        fit_nonnegative(np.ones((3, 2)), np.ones(3), [1.0, 2.0, 3.0])


def test_hat_samples_method():
    rates = np.array([0.0, 1.0])
    times = np.linspace(0.0, 1.0, 5)
    fit = fit_nonnegative(exponential_columns(times, rates), np.ones(5), rates)
    assert fit.hat_samples(0.1, 3) == pytest.approx([0.5, 1.0, 1.0], abs=1e-8)
