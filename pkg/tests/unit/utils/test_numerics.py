"""测试通用数值工具"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.utils.numerics import (
    central_derivative,
    gauss_legendre_unit,
    left_cumulative,
    moving_average,
    relative_l2,
)


class TestGaussLegendre:
    """测试 (0,1) 上的 Gauss–Legendre 求积"""

    def test_weights_sum_to_one(self):
        """权重之和为区间长度"""
        nodes, weights = gauss_legendre_unit(16)
        assert np.all((nodes > 0.0) & (nodes < 1.0))
        assert abs(np.sum(weights) - 1.0) < 1e-14

    def test_polynomial_exactness(self):
        """8 点公式对 15 次多项式精确"""
        nodes, weights = gauss_legendre_unit(8)
        assert abs(np.dot(weights, nodes**15) - 1.0 / 16.0) < 1e-14


class TestDifferences:
    """测试平滑与差分"""

    def test_moving_average_keeps_constants(self):
        values = np.full(20, 3.0)
        assert np.allclose(moving_average(values, 5), 3.0)

    def test_moving_average_width_one_copies(self):
        values = np.arange(5.0)
        result = moving_average(values, 1)
        assert np.array_equal(result, values)
        assert result is not values

    def test_central_derivative_interior_is_fourth_order(self):
        """内点四阶精度，边界二阶"""
        step = 0.01
        t = np.arange(0.0, 2.0 + step / 2, step)
        derivative = central_derivative(np.sin(t), step)
        error = np.abs(derivative - np.cos(t))
        assert np.max(error[2:-2]) < 1e-8
        assert np.max(error) < 1e-3

    def test_second_derivative_of_quadratic(self):
        step = 0.1
        t = np.arange(0.0, 1.0 + step / 2, step)
        assert np.allclose(central_derivative(t**2, step, order=2), 2.0)


class TestNorms:
    """测试误差与累积积分"""

    def test_relative_l2(self):
        estimate = np.array([1.1, 2.2])
        assert relative_l2(estimate, np.array([1.0, 2.0])) == pytest.approx(0.1)

    def test_relative_l2_zero_reference(self):
        """参考为零时退化为绝对误差"""
        assert relative_l2(np.array([3.0, 4.0]), np.zeros(2)) == 5.0

    def test_left_cumulative_of_ones(self):
        result = left_cumulative(np.ones(5), 0.5)
        assert np.allclose(result, [0.0, 0.5, 1.0, 1.5, 2.0])

    def test_left_cumulative_rows(self):
        """二维输入按最后一维累积"""
        values = np.vstack([np.ones(4), 2.0 * np.ones(4)])
        result = left_cumulative(values, 1.0)
        assert np.allclose(result[1], [0.0, 2.0, 4.0, 6.0])


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.floats(min_value=0.0, max_value=1e3, allow_nan=False),
        min_size=2,
        max_size=40,
    )
)
def test_left_cumulative_is_monotone_for_nonnegative_values(values):
    """非负被积函数的累积积分单调不减"""
    result = left_cumulative(np.asarray(values), 0.1)
    assert result[0] == 0.0
    assert np.all(np.diff(result) >= 0.0)
