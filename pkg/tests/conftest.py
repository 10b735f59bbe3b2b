# tests/conftest.py
import numpy as np
import pytest
import yaml

from src.core.forward.simulator import simulate
from src.core.forward.sources import indicator_profile, make_partitioned_source
from src.core.kernels.memory_kernel import PowerLawKernel, TemperedKernel
from src.infrastructure.config.config_manager import default_config_dict
from src.infrastructure.logging.logger import get_logger
from src.models.entities import ObservationWindow, TimeGrid


@pytest.fixture(autouse=True)
def isolated_logger(tmp_path):
    """每个测试使用独立的日志文件，避免在仓库目录下生成 logs/"""
    return get_logger(log_file=str(tmp_path / "logs" / "test.log"), log_level="debug")


@pytest.fixture
def grid():
    """带间隙标记的标准网格：T=4, N=256, t0=1, t1=1.5"""
    return TimeGrid.from_times(4.0, 256, 1.0, 1.5)


@pytest.fixture
def plain_grid():
    """无标记的正问题网格"""
    return TimeGrid(T=1.0, N=512)


@pytest.fixture
def power_kernel():
    return PowerLawKernel(1.0, 0.5)


@pytest.fixture
def tempered_kernel():
    return TemperedKernel(1.0, 0.5, 1.0)


def build_window(kernel, eigenvalues, grid, u0=None, known_zero=False):
    """分块源项逐模态激发，零历史时返回观测窗口"""
    lam = np.asarray(eigenvalues, dtype=float)
    mode_count = lam.size
    width = 0.25
    blocks = []
    for k in range(mode_count):
        start = grid.t1 + k * width
        vector = np.zeros(mode_count)
        vector[k] = 1.0
        blocks.append((indicator_profile(grid, start, start + width), vector))
    source = make_partitioned_source(blocks, grid)
    initial = np.zeros(mode_count) if u0 is None else np.asarray(u0, dtype=float)
    result = simulate(lam, kernel, initial, source, grid, threads=1)
    return ObservationWindow(
        grid=grid,
        data=result.modes,
        source=source,
        known_zero_history=known_zero,
    )


@pytest.fixture
def window_factory():
    """构造合成观测窗口的工厂"""
    return build_window


@pytest.fixture
def config_file(tmp_path):
    """写出一份默认配置文件，可用 updates 覆盖各节"""

    def write(updates=None, name="config.yaml"):
        data = default_config_dict()
        data["app"]["log_file"] = str(tmp_path / "logs" / "run.log")
        data["output"]["directory"] = str(tmp_path / "results")
        for section, values in (updates or {}).items():
            if isinstance(values, dict) and isinstance(data.get(section), dict):
                data[section].update(values)
            else:
                data[section] = values
        path = tmp_path / name
        path.write_text(
            yaml.dump(data, allow_unicode=True, sort_keys=False), encoding="utf-8"
        )
        return path

    return write
