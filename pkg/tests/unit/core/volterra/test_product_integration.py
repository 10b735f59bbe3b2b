"""测试乘积积分卷积与第二类方程推进"""

import math

import numpy as np
import pytest

from src.core.kernels.memory_kernel import PowerLawKernel, TabulatedKernel
from src.core.laplace.mittag_leffler import mittag_leffler
from src.core.volterra.product_integration import (
    apply_weights,
    kernel_hat_samples,
    mode_residual,
    product_weights,
    solve_second_kind,
    weighted_convolve,
)
from src.infrastructure.errors.exceptions import PreconditionError
from src.models.entities import TimeGrid


def _oracle_error(alpha, lam, grid, start_time=0.5):
    kernel = PowerLawKernel(1.0, alpha)
    v = solve_second_kind(kernel, lam, np.ones(grid.N + 1), grid).values
    times = grid.times
    mask = times >= start_time
    exact = np.array([mittag_leffler(alpha, -lam * t**alpha) for t in times[mask]])
    return float(np.max(np.abs(v[mask] - exact)))


class TestWeightedConvolve:
    """测试 (M∗g)(t_n) 的离散化"""

    def test_constant_input_gives_primitive(self, plain_grid, power_kernel):
        result = weighted_convolve(power_kernel, np.ones(plain_grid.N + 1), plain_grid)
        expected = 2.0 * np.sqrt(plain_grid.times / math.pi)
        assert np.allclose(result, expected, rtol=1e-12, atol=1e-15)

    def test_linear_input_beta_integral(self, plain_grid, power_kernel):
        """g(τ)=τ 时 M∗g = t^{3/2}/Γ(5/2)"""
        times = plain_grid.times
        result = weighted_convolve(power_kernel, times, plain_grid)
        assert np.allclose(result, times**1.5 / math.gamma(2.5), atol=1e-10)

    def test_constant_kernel(self):
        grid = TimeGrid(T=2.0, N=64)
        kernel = TabulatedKernel.constant(1.0, 2.0)
        result = weighted_convolve(kernel, np.ones(65), grid)
        assert np.allclose(result, grid.times, atol=1e-12)

    def test_starts_at_zero_and_is_causal(self, plain_grid, power_kernel):
        rng = np.random.default_rng(7)
        g = rng.normal(size=plain_grid.N + 1)
        perturbed = g.copy()
        perturbed[301:] += 5.0
        base = weighted_convolve(power_kernel, g, plain_grid)
        changed = weighted_convolve(power_kernel, perturbed, plain_grid)
        assert base[0] == 0.0
        assert np.array_equal(base[:301], changed[:301])

    def test_precomputed_weights(self, plain_grid, power_kernel):
        weights = product_weights(power_kernel, plain_grid)
        g = np.cos(plain_grid.times)
        assert np.array_equal(
            weighted_convolve(None, g, plain_grid, weights),
            weighted_convolve(power_kernel, g, plain_grid),
        )

    def test_length_mismatch(self, plain_grid, power_kernel):
        weights = product_weights(power_kernel, plain_grid)
        with pytest.raises(PreconditionError):
            apply_weights(weights, np.ones(10))

    def test_requires_kernel_or_weights(self, plain_grid):
        with pytest.raises(PreconditionError):
            weighted_convolve(None, np.ones(plain_grid.N + 1), plain_grid)


def test_hat_samples_of_constant_kernel():
    """首个未知量为半帽平均"""
    grid = TimeGrid(T=1.0, N=16)
    samples = kernel_hat_samples(TabulatedKernel.constant(1.0, 1.0), grid)
    assert samples[0] == pytest.approx(0.5)
    assert np.allclose(samples[1:], 1.0)


class TestSolveSecondKind:
    """测试 v + λ M∗v = g 的推进"""

    def test_ode_limit(self, plain_grid):
        kernel = TabulatedKernel.constant(1.0, 1.0)
        v = solve_second_kind(kernel, 1.0, np.ones(plain_grid.N + 1), plain_grid)
        assert np.max(np.abs(v.values - np.exp(-plain_grid.times))) < 1e-4

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("lam", [1.0, 10.0])
    def test_mittag_leffler_oracle(self, plain_grid, alpha, lam):
        assert _oracle_error(alpha, lam, plain_grid) < 1e-3

    def test_convergence_under_refinement(self):
        coarse = _oracle_error(0.5, 1.0, TimeGrid(T=1.0, N=128))
        fine = _oracle_error(0.5, 1.0, TimeGrid(T=1.0, N=256))
        assert coarse / fine >= 1.8

    def test_residual_is_rounding_level(self, plain_grid, power_kernel):
        weights = product_weights(power_kernel, plain_grid)
        g = 1.0 + np.sin(3.0 * plain_grid.times)
        v = solve_second_kind(power_kernel, 4.0, g, plain_grid, weights)
        assert v.values[0] == g[0]
        assert mode_residual(weights, 4.0, v.values, g) < 1e-10

    def test_zero_eigenvalue_returns_input(self, plain_grid):
        g = np.linspace(0.0, 1.0, plain_grid.N + 1)
        v = solve_second_kind(None, 0.0, g, plain_grid)
        assert np.array_equal(v.values, g)

    def test_negative_eigenvalue(self, plain_grid, power_kernel):
        with pytest.raises(PreconditionError):
            solve_second_kind(power_kernel, -1.0, np.ones(plain_grid.N + 1), plain_grid)

    def test_rhs_shape(self, plain_grid, power_kernel):
        with pytest.raises(PreconditionError):
            solve_second_kind(power_kernel, 1.0, np.ones(5), plain_grid)
