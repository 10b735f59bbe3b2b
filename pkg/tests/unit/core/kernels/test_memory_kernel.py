"""测试记忆核族"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import rgamma

from src.core.kernels.memory_kernel import (
    DistributedOrderKernel,
    PowerLawKernel,
    TabulatedKernel,
    TemperedKernel,
    build_kernel,
    eval_kernel,
    kernel_primitives,
    laplace_kernel,
)
from src.infrastructure.errors.exceptions import DomainError, PreconditionError
from src.models.entities import DistributedOrderMeasure

SQRT_PI = math.sqrt(math.pi)


class TestEvaluation:
    """测试点值"""

    def test_power_law(self):
        assert eval_kernel(PowerLawKernel(1.0, 0.5), 1.0) == pytest.approx(1 / SQRT_PI)

    def test_tempered(self):
        value = eval_kernel(TemperedKernel(1.0, 0.5, 1.0), 1.0)
        assert value == pytest.approx(math.exp(-1.0) / SQRT_PI)

    def test_single_atom_distributed_order(self):
        """单原子分布阶核退化为幂律核"""
        kernel = DistributedOrderKernel.multiterm([(0.5, 2.0)])
        assert eval_kernel(kernel, 1.0) == pytest.approx(2.0 / SQRT_PI)
        t = np.linspace(0.1, 3.0, 7)
        assert np.allclose(kernel(t), PowerLawKernel(2.0, 0.5)(t), rtol=1e-14)

    def test_vector_input(self):
        values = PowerLawKernel(1.0, 0.5)(np.array([1.0, 4.0]))
        assert isinstance(values, np.ndarray)
        assert values[1] == pytest.approx(0.5 / SQRT_PI)

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_nonpositive_time(self, t):
        with pytest.raises(DomainError):
            eval_kernel(PowerLawKernel(1.0, 0.5), t)

    def test_parameter_domain(self):
        with pytest.raises(DomainError):
            PowerLawKernel(1.0, 1.0)
        with pytest.raises(DomainError):
            TemperedKernel(1.0, 0.5, 0.0)
        with pytest.raises(DomainError):
            PowerLawKernel(-1.0, 0.5)

    def test_density_kernel_uses_quadrature(self):
        """均匀密度的分布阶核在 t=1 处等于 ∫ 1/Γ(α) dα"""
        measure = DistributedOrderMeasure(density=lambda a: np.ones_like(a))
        kernel = DistributedOrderKernel(measure)
        expected, _ = quad(rgamma, 0.0, 1.0)
        assert eval_kernel(kernel, 1.0) == pytest.approx(expected, rel=1e-10)


class TestLaplace:
    """测试拉普拉斯变换"""

    def test_power_law_real(self):
        assert laplace_kernel(PowerLawKernel(1.0, 0.5), 1.0) == pytest.approx(1.0)

    def test_tempered_real(self):
        value = laplace_kernel(TemperedKernel(1.0, 0.5, 1.0), 1.0)
        assert value == pytest.approx(2.0**-0.5)

    def test_power_law_principal_branch(self):
        value = laplace_kernel(PowerLawKernel(1.0, 0.5), 4j)
        assert value == pytest.approx(0.5 * np.exp(-1j * math.pi / 4))

    def test_power_law_matches_numerical_laplace(self):
        """闭式变换与数值拉普拉斯积分一致"""
        kernel = PowerLawKernel(1.0, 0.5)
        s = 2.0
        # 代换 t = u² 去掉端点奇异性
        numeric, _ = quad(lambda u: 2.0 * math.exp(-s * u * u) / SQRT_PI, 0.0, np.inf)
        assert laplace_kernel(kernel, s).real == pytest.approx(numeric, rel=1e-9)

    @pytest.mark.parametrize("s", [0.0, -2.0])
    def test_branch_cut(self, s):
        with pytest.raises(DomainError):
            laplace_kernel(PowerLawKernel(1.0, 0.5), s)

    @pytest.mark.parametrize(
        "kernel",
        [
            PowerLawKernel(1.0, 0.3),
            PowerLawKernel(1.0, 0.7),
            TemperedKernel(1.0, 0.5, 1.0),
            DistributedOrderKernel.multiterm([(0.4, 1.0), (0.8, 1.0)]),
        ],
    )
    @pytest.mark.parametrize("theta", [0.0, math.pi / 3, 0.9 * math.pi])
    def test_decay_envelope(self, kernel, theta):
        """沿射线 2^j e^{iθ} 模严格递减"""
        radii = 2.0 ** np.arange(11)
        moduli = [abs(laplace_kernel(kernel, r * np.exp(1j * theta))) for r in radii]
        assert np.all(np.diff(moduli) < 0.0)

    @pytest.mark.parametrize("alpha", [0.7, 0.9])
    @pytest.mark.parametrize("theta", [0.0, math.pi / 3, 0.9 * math.pi])
    def test_decay_envelope_threshold(self, alpha, theta):
        """α ≥ 0.7 时 j=10 处已降到起点的 1e-2 以下"""
        kernel = PowerLawKernel(1.0, alpha)
        direction = np.exp(1j * theta)
        first = abs(laplace_kernel(kernel, direction))
        last = abs(laplace_kernel(kernel, 1024.0 * direction))
        assert last < 1e-2 * first


class TestPrimitives:
    """测试一阶、二阶原函数"""

    def test_power_law_closed_form(self):
        kernel = PowerLawKernel(2.0, 0.5)
        m, p1, p2 = kernel_primitives(kernel, 1.0)
        assert m == pytest.approx(2.0 / SQRT_PI)
        assert p1 == pytest.approx(2.0 / math.gamma(1.5))
        assert p2 == pytest.approx(2.0 / math.gamma(2.5))

    def test_primitives_vanish_at_origin(self):
        kernel = TemperedKernel(1.0, 0.5, 1.0)
        assert kernel.primitive(0.0) == 0.0
        assert kernel.second_primitive(0.0) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
    def test_tempered_against_quadrature(self, t):
        kernel = TemperedKernel(1.5, 0.4, 2.0)
        first, _ = quad(
            lambda s: 1.5 * math.exp(-2.0 * s) / math.gamma(0.4),
            0.0,
            t,
            weight="alg",
            wvar=(-0.6, 0.0),
        )
        second, _ = quad(kernel.primitive, 0.0, t, epsabs=1e-13)
        assert kernel.primitive(t) == pytest.approx(first, rel=1e-9)
        assert kernel.second_primitive(t) == pytest.approx(second, rel=1e-8)

    def test_multiterm_primitives_sum(self):
        kernel = DistributedOrderKernel.multiterm([(0.3, 1.0), (0.8, 2.0)])
        t = np.array([0.5, 1.5])
        expected = PowerLawKernel(1.0, 0.3).second_primitive(t) + PowerLawKernel(
            2.0, 0.8
        ).second_primitive(t)
        assert np.allclose(kernel.second_primitive(t), expected, rtol=1e-13)

    def test_singular_at_origin(self):
        assert DistributedOrderKernel.multiterm([(0.5, 1.0)]).singular_at_origin
        assert not DistributedOrderKernel.multiterm([(1.0, 1.0)]).singular_at_origin


class TestTabulated:
    """测试表格核"""

    def test_power_law_samples_are_reproduced(self):
        """对数-对数插值对幂律精确，首段外推给出精确原函数"""
        reference = PowerLawKernel(1.0, 0.5)
        times = np.geomspace(1e-3, 4.0, 40)
        kernel = TabulatedKernel.from_function(reference, times)
        t = np.array([0.0005, 0.01, 0.7, 3.9])
        assert np.allclose(kernel(t[1:]), reference(t[1:]), rtol=1e-12)
        assert np.allclose(kernel.primitive(t), reference.primitive(t), rtol=1e-10)
        assert np.allclose(
            kernel.second_primitive(t), reference.second_primitive(t), rtol=1e-10
        )

    def test_constant_kernel(self):
        kernel = TabulatedKernel.constant(2.0, 3.0)
        assert kernel(1.0) == pytest.approx(2.0)
        assert kernel.primitive(1.5) == pytest.approx(3.0)
        assert kernel.second_primitive(2.0) == pytest.approx(4.0)
        assert not kernel.singular_at_origin

    def test_no_extrapolation(self):
        kernel = TabulatedKernel.constant(1.0, 1.0)
        with pytest.raises(DomainError):
            kernel(2.0)
        with pytest.raises(DomainError):
            kernel.primitive(2.0)

    def test_non_integrable_head(self):
        times = np.array([0.1, 1.0])
        with pytest.raises(DomainError):
            TabulatedKernel(times, times**-1.5)

    def test_requires_two_nodes(self):
        with pytest.raises(PreconditionError):
            TabulatedKernel(np.array([1.0]), np.array([1.0]))

    def test_from_csv_skips_header_and_zero_row(self, tmp_path):
        path = tmp_path / "kernel.csv"
        path.write_text(
            "# family=tabulated\nt,M\n0.0,5.0\n0.5,1.5\n1.0,1.0\n", encoding="utf-8"
        )
        kernel = TabulatedKernel.from_csv(path)
        assert kernel.t_first == 0.5
        assert kernel(1.0) == pytest.approx(1.0)

    def test_scaled(self):
        kernel = TabulatedKernel.constant(1.0, 1.0).scaled(3.0)
        assert kernel(0.5) == pytest.approx(3.0)


class TestBuildKernel:
    """测试由配置字典构造核"""

    def test_families(self, tmp_path):
        assert isinstance(
            build_kernel({"family": "power_law", "alpha": 0.5}), PowerLawKernel
        )
        tempered = build_kernel({"family": "tempered", "alpha": 0.5, "lambda": 2.0})
        assert isinstance(tempered, TemperedKernel)
        assert tempered.lam == 2.0
        multi = build_kernel(
            {"family": "distributed_order", "atoms": [[0.8, 1], [0.3, 2]]}
        )
        assert [a for a, _ in multi.measure.atoms] == [0.3, 0.8]
        constant = build_kernel({"family": "constant", "value": 2.0, "t_end": 4.0})
        assert constant.t_last == 4.0

    def test_unknown_family(self):
        with pytest.raises(PreconditionError):
            build_kernel({"family": "gaussian"})

    def test_round_trip_spec(self):
        kernel = TemperedKernel(2.0, 0.3, 0.5)
        assert build_kernel(kernel.to_spec()) == kernel

    def test_scaled_kernels(self):
        assert PowerLawKernel(1.0, 0.5).scaled(2.0) == PowerLawKernel(2.0, 0.5)
        scaled = DistributedOrderKernel.multiterm([(0.5, 1.0)]).scaled(2.0)
        assert scaled(1.0) == pytest.approx(2.0 / SQRT_PI)
