import math

import pytest
import yaml

from src.core.inverse.settings import RegularizationSettings
from src.infrastructure.config.config_manager import (
    ConfigManager,
    ExperimentConfig,
    SourceBlockConfig,
    default_config_dict,
)
from src.infrastructure.errors.exceptions import ConfigError


# 测试配置加载
def test_config_load(config_file):
    config_manager = ConfigManager(str(config_file()))
    config = config_manager.get_config()

    assert isinstance(config, ExperimentConfig)
    assert config.kernel.family == "power_law"
    assert config.grid.N == 256
    assert (config.grid.t0, config.grid.t1) == (1.0, 1.5)
    assert isinstance(config.source.blocks[0], SourceBlockConfig)
    assert config.operator.length == pytest.approx(math.pi)


# 测试配置文件不存在时写出默认配置
def test_default_config_created(tmp_path):
    path = tmp_path / "nested" / "config.yaml"
    config = ConfigManager(str(path)).load_config()
    assert path.exists()
    with open(path, "r", encoding="utf-8") as f:
        assert yaml.safe_load(f) == default_config_dict()
    assert config.source.structure == "partitioned"


# 测试空文件使用全部默认值
def test_empty_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("", encoding="utf-8")
    config = ConfigManager(str(path)).load_config()
    assert config == ExperimentConfig()


# 测试命令行覆盖
def test_overrides(config_file):
    manager = ConfigManager(str(config_file()))
    config = manager.load_config(["kernel.alpha=0.3", "grid.N=128", "seed=7"])
    assert config.kernel.alpha == 0.3
    assert config.grid.N == 128
    assert config.seed == 7
    assert manager.raw["kernel"]["alpha"] == 0.3


def test_override_creates_missing_section():
    raw = ConfigManager.apply_overrides({}, ["noise.level=0.01"])
    assert raw == {"noise": {"level": 0.01}}


@pytest.mark.parametrize(
    "override",
    ["kernel.alpha", "=1", "kernel.family.name=x"],
)
def test_bad_override(override):
    with pytest.raises(ConfigError):
        ConfigManager.apply_overrides({"kernel": {"family": "tempered"}}, [override])


def test_overrides_do_not_mutate_input():
    raw = {"kernel": {"alpha": 0.5}}
    ConfigManager.apply_overrides(raw, ["kernel.alpha=0.2"])
    assert raw["kernel"]["alpha"] == 0.5


# 测试校验错误携带字段路径
@pytest.mark.parametrize(
    "updates,field_path",
    [
        ({"kernel": {"alpha": 1.5}}, "kernel.alpha"),
        ({"kernel": {"c": -1.0}}, "kernel.c"),
        ({"kernel": {"family": "gaussian"}}, "kernel.family"),
        ({"kernel": {"family": "tabulated", "path": None}}, "kernel.path"),
        ({"grid": {"N": 32}}, "grid.N"),
        ({"grid": {"t1": 0.5}}, "grid.t1"),
        ({"grid": {"t0": None}}, "grid.t0"),
        ({"operator": {"potential": 1.0}}, "operator.potential"),
        ({"operator": {"mode_count": 0}}, "operator.mode_count"),
        ({"measure": {"atoms": [[1.5, 1.0]]}}, "measure.atoms[0]"),
        ({"functional": {"x0": 10.0}}, "functional.x0"),
        ({"functional": {"kind": "mean", "a": 2.0, "b": 1.0}}, "functional.b"),
        ({"noise": {"level": -0.1}}, "noise.level"),
        ({"output": {"report_format": "html"}}, "output.report_format"),
        ({"app": {"threads": 0}}, "app.threads"),
        ({"kernel": {"colour": "red"}}, "kernel.colour"),
        ({"seed": -1}, "seed"),
        ({"extras": {}}, "extras"),
    ],
)
def test_validation_errors(config_file, updates, field_path):
    manager = ConfigManager(str(config_file(updates)))
    with pytest.raises(ConfigError) as exc_info:
        manager.load_config()
    assert exc_info.value.field_path == field_path


def test_block_errors_are_indexed(config_file):
    blocks = [
        {"start": 1.5, "end": 2.0, "modes": [1.0]},
        {"start": 3.0, "end": 5.0, "modes": [1.0]},
    ]
    manager = ConfigManager(str(config_file({"source": {"blocks": blocks}})))
    with pytest.raises(ConfigError) as exc_info:
        manager.load_config()
    assert exc_info.value.field_path == "source.blocks[1].end"


def test_block_missing_field(config_file):
    manager = ConfigManager(str(config_file({"source": {"blocks": [{"end": 2.0}]}})))
    with pytest.raises(ConfigError) as exc_info:
        manager.load_config()
    assert exc_info.value.field_path == "source.blocks[0].start"


def test_invalid_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("kernel: [unclosed", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigManager(str(path)).load_config()


def test_top_level_must_be_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigManager(str(path)).load_config()


# 测试正则化设置转换
def test_regularization_settings(config_file):
    config = ConfigManager(str(config_file())).load_config(
        ["regularization.epsilon=0.001"]
    )
    settings = config.regularization.to_settings()
    assert isinstance(settings, RegularizationSettings)
    assert settings.epsilon == 0.001


# 测试配置哈希
def test_config_hash(config_file):
    first = ConfigManager(str(config_file())).load_config()
    second = ConfigManager(str(config_file(name="other.yaml"))).load_config()
    assert ConfigManager.config_hash(first) == ConfigManager.config_hash(second)
    assert len(ConfigManager.config_hash(first)) == 64

    third = ConfigManager(str(config_file())).load_config(["seed=3"])
    assert ConfigManager.config_hash(third) != ConfigManager.config_hash(first)


# 测试序列化往返
def test_to_dict_round_trip(config_file):
    config = ConfigManager(str(config_file())).load_config(["kernel.family=tempered"])
    again = ConfigManager.parse(ConfigManager.to_dict(config))
    assert again == config


# 测试科学计数法：覆盖项与 YAML 文件都读成浮点数
def test_scientific_notation_override(config_file):
    config = ConfigManager(str(config_file())).load_config(
        [
            "noise.level=1e-4",
            "regularization.tikhonov=1E-8",
            "regularization.noise=2e-5",
        ]
    )
    assert config.noise.level == 1e-4
    assert isinstance(config.regularization.tikhonov, float)
    assert config.regularization.tikhonov == 1e-8
    assert config.regularization.to_settings().noise == 2e-5


def test_scientific_notation_in_yaml_file(tmp_path):
    path = tmp_path / "sci.yaml"
    path.write_text(
        "noise: {level: 1e-4}\nregularization: {tikhonov: 1e-8, epsilon: +5e-3}\n",
        encoding="utf-8",
    )
    config = ConfigManager(str(path)).load_config()
    assert config.noise.level == 1e-4
    assert config.regularization.tikhonov == 1e-8
    assert config.regularization.epsilon == 5e-3


def test_quoted_number_is_coerced(config_file):
    manager = ConfigManager(str(config_file({"regularization": {"tikhonov": "1e-6"}})))
    assert manager.load_config().regularization.tikhonov == 1e-6


@pytest.mark.parametrize(
    "override,field_path",
    [
        ("regularization.tikhonov=abc", "regularization.tikhonov"),
        ("regularization.tikhonov=-1e-3", "regularization.tikhonov"),
        ("regularization.epsilon=-0.1", "regularization.epsilon"),
        ("regularization.noise=-1e-4", "regularization.noise"),
        ("regularization.spread_threshold=0", "regularization.spread_threshold"),
        (
            "regularization.proportionality_tolerance=-1",
            "regularization.proportionality_tolerance",
        ),
        ("regularization.misfit_tolerance=-1", "regularization.misfit_tolerance"),
        ("regularization.grid_points=1", "regularization.grid_points"),
        ("regularization.smoothing_width=0", "regularization.smoothing_width"),
        ("regularization.polish_count=2.5", "regularization.polish_count"),
        (
            "regularization.completely_monotone=maybe",
            "regularization.completely_monotone",
        ),
    ],
)
def test_regularization_validation(config_file, override, field_path):
    manager = ConfigManager(str(config_file()))
    with pytest.raises(ConfigError) as exc_info:
        manager.load_config([override])
    assert exc_info.value.field_path == field_path


def test_spread_threshold_zero_in_file(config_file):
    manager = ConfigManager(
        str(config_file({"regularization": {"spread_threshold": 0}}))
    )
    with pytest.raises(ConfigError) as exc_info:
        manager.load_config()
    assert exc_info.value.field_path == "regularization.spread_threshold"
