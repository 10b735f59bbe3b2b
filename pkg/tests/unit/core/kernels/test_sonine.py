"""测试 Sonine 伴随核"""

import numpy as np
import pytest
from scipy.special import rgamma

from src.core.kernels.memory_kernel import (
    DistributedOrderKernel,
    PowerLawKernel,
    TabulatedKernel,
    TemperedKernel,
)
from src.core.kernels.sonine import (
    analytic_sonine_partner,
    sonine_moments,
    sonine_partner,
)
from src.infrastructure.errors.exceptions import (
    PreconditionError,
    UnsupportedVariantError,
)
from src.models.entities import TimeGrid


@pytest.fixture
def unit_grid():
    return TimeGrid(T=1.0, N=512)


class TestSoninePartner:
    """测试数值伴随核"""

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_power_law_residual(self, alpha, unit_grid):
        partner = sonine_partner(PowerLawKernel(1.0, alpha), unit_grid)
        assert partner.residual <= 1e-6
        assert np.all(partner.cell_values > 0.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.5])
    def test_power_law_matches_analytic_partner(self, alpha, unit_grid):
        """后段单元值接近 t^{-α}/Γ(1-α)"""
        partner = sonine_partner(PowerLawKernel(1.0, alpha), unit_grid)
        midpoints = unit_grid.times[:-1] + 0.5 * unit_grid.h
        exact = midpoints ** (-alpha) * rgamma(1.0 - alpha)
        late = midpoints >= 0.25
        relative = np.abs(partner.cell_values[late] / exact[late] - 1.0)
        assert np.max(relative) < 0.05

    def test_tempered_residual(self, unit_grid):
        partner = sonine_partner(TemperedKernel(1.0, 0.5, 1.0), unit_grid)
        assert partner.residual <= 1e-6
        assert partner.kernel.t_first == pytest.approx(0.5 * unit_grid.h)

    def test_moments_sum_to_primitive(self, unit_grid):
        kernel = PowerLawKernel(1.0, 0.5)
        moments = sonine_moments(kernel, unit_grid)
        assert moments.size == unit_grid.N
        assert np.sum(moments) == pytest.approx(kernel.primitive(1.0))

    def test_bounded_kernel_rejected(self, unit_grid):
        with pytest.raises(PreconditionError):
            sonine_partner(TabulatedKernel.constant(1.0, 1.0), unit_grid)
        with pytest.raises(PreconditionError):
            sonine_partner(
                DistributedOrderKernel.multiterm([(0.5, 1.0), (1.0, 1.0)]), unit_grid
            )


class TestAnalyticPartner:
    """测试幂律闭式伴随"""

    def test_power_law(self):
        assert analytic_sonine_partner(PowerLawKernel(2.0, 0.3)) == PowerLawKernel(
            0.5, 0.7
        )

    def test_self_dual(self):
        kernel = PowerLawKernel(1.0, 0.5)
        assert analytic_sonine_partner(kernel) == kernel

    def test_unsupported(self):
        with pytest.raises(UnsupportedVariantError):
            analytic_sonine_partner(TemperedKernel(1.0, 0.5, 1.0))
