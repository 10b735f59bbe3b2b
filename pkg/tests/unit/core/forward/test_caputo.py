"""测试广义 Caputo 形式的一致性"""

import numpy as np
import pytest

from src.core.forward.caputo import caputo_form, cell_convolve
from src.core.kernels.memory_kernel import PowerLawKernel, TabulatedKernel
from src.core.volterra.product_integration import solve_second_kind
from src.infrastructure.errors.exceptions import PreconditionError
from src.models.entities import TimeGrid


@pytest.fixture
def caputo_grid():
    return TimeGrid(T=1.0, N=256)


def _relaxation(kernel, lam, grid, g=None):
    rhs = np.ones(grid.N + 1) if g is None else g
    return solve_second_kind(kernel, lam, rhs, grid).values


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_relaxation_satisfies_caputo_form(alpha, caputo_grid):
    kernel = PowerLawKernel(1.0, alpha)
    u = _relaxation(kernel, 2.0, caputo_grid)
    check = caputo_form(kernel, 2.0, u, np.zeros(caputo_grid.N + 1), caputo_grid)
    assert check.relative < 0.05
    assert check.residual[0] == 0.0


def test_wrong_eigenvalue_is_detected(caputo_grid):
    kernel = PowerLawKernel(1.0, 0.5)
    u = _relaxation(kernel, 1.0, caputo_grid)
    check = caputo_form(kernel, 3.0, u, np.zeros(caputo_grid.N + 1), caputo_grid)
    assert check.relative > 0.3


def test_forced_mode(caputo_grid):
    """u(0)=0，f ≡ 1"""
    kernel = PowerLawKernel(1.0, 0.5)
    source_row = np.ones(caputo_grid.N + 1)
    u = _relaxation(kernel, 1.0, caputo_grid, caputo_grid.times.copy())
    check = caputo_form(kernel, 1.0, u, source_row, caputo_grid)
    assert check.relative < 0.05


def test_cell_convolve_of_constants():
    """K ≡ 1 的单元与 g ≡ 1 的卷积为 t"""
    grid = TimeGrid(T=1.0, N=8)
    result = cell_convolve(np.ones(8), np.ones(9), grid.h)
    assert np.allclose(result, grid.times)


def test_shape_errors(caputo_grid):
    with pytest.raises(PreconditionError):
        cell_convolve(np.ones(4), np.ones(4), 0.1)
    with pytest.raises(PreconditionError):
        caputo_form(PowerLawKernel(), 1.0, np.ones(3), np.zeros(3), caputo_grid)


def test_bounded_kernel_has_no_partner(caputo_grid):
    with pytest.raises(PreconditionError):
        caputo_form(
            TabulatedKernel.constant(1.0, 1.0),
            1.0,
            np.ones(caputo_grid.N + 1),
            np.zeros(caputo_grid.N + 1),
            caputo_grid,
        )
