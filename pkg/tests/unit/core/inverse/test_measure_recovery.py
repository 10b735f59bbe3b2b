"""测试分布阶测度的剥离恢复"""

import numpy as np
import pytest

from src.core.inverse.measure_recovery import (
    recover_distributed_measure,
    recover_kernel_and_measure,
)
from src.core.inverse.settings import RegularizationSettings
from src.infrastructure.errors.exceptions import (
    InconsistencyError,
    ModelOrderError,
    PreconditionError,
)

MU = np.arange(1.0, 65.0) ** 2


def test_two_atoms():
    lam = 2.0 * MU**0.8 + MU**0.3
    recovery = recover_distributed_measure(lam, MU)
    (beta_low, kappa_low), (beta_high, kappa_high) = recovery.atoms
    assert beta_low == pytest.approx(0.3, rel=0.02)
    assert kappa_low == pytest.approx(1.0, rel=0.02)
    assert beta_high == pytest.approx(0.8, rel=0.02)
    assert kappa_high == pytest.approx(2.0, rel=0.02)
    assert recovery.eta == 0.0
    assert recovery.residual_history[-1] <= 1e-8


def test_single_atom_is_exact():
    recovery = recover_distributed_measure(3.0 * MU**0.5, MU)
    assert recovery.atoms == [pytest.approx((0.5, 3.0))]


def test_shift_search():
    """λ 由 μ_k + 1 生成时 η = 1"""
    mu = MU[:32]
    lam = (mu + 1.0) ** 0.7
    recovery = recover_distributed_measure(lam, mu, shift_search=True)
    assert recovery.eta == pytest.approx(1.0, abs=1e-6)
    assert recovery.atoms[0][0] == pytest.approx(0.7, abs=1e-6)


def test_model_order_exceeded():
    lam = 2.0 * MU**0.8 + MU**0.3
    with pytest.raises(ModelOrderError):
        recover_distributed_measure(lam, MU, max_atoms=1)


def test_superlinear_growth_is_inconsistent():
    with pytest.raises(InconsistencyError):
        recover_distributed_measure(MU**1.5, MU)


def test_validation():
    with pytest.raises(PreconditionError):
        recover_distributed_measure([1.0, 2.0, 3.0], [1.0, 4.0, 9.0])
    with pytest.raises(PreconditionError):
        recover_distributed_measure(MU**0.5, MU[::-1])
    with pytest.raises(PreconditionError):
        recover_distributed_measure(MU**0.5, MU, max_atoms=0)


def test_from_window(grid, power_kernel, window_factory):
    """乘积恢复的 λ_k 与测度共用规范常数"""
    mu = np.array([1.0, 4.0, 9.0, 16.0])
    window = window_factory(power_kernel, mu**0.5, grid, known_zero=True)
    report = recover_kernel_and_measure(
        window, mu, RegularizationSettings(noise=0.0), threads=1
    )
    assert report.kind == "kernel_measure"
    assert len(report.parameters["atoms"]) == 1
    assert report.parameters["atoms"][0][0] == pytest.approx(0.5, abs=1e-6)
    assert report.parameters["measure_modes"] == [1, 2, 3, 4]
