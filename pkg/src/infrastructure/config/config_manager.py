import copy
import hashlib
import logging
import math
import os
import re
from dataclasses import MISSING, asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, cast

import yaml

from src.core.inverse.settings import RegularizationSettings
from src.infrastructure.errors.exceptions import ConfigError

logger = logging.getLogger(__name__)


class ConfigLoader(yaml.SafeLoader):
    """YAML 1.1 的浮点规则要求小数点和带符号的指数，1e-4 会被读成字符串"""


ConfigLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?[0-9][0-9_]*(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)

KERNEL_FAMILIES = (
    "power_law",
    "tempered",
    "distributed_order",
    "tabulated",
    "constant",
)
PROFILE_KINDS = ("indicator", "ramp", "hat")
SOURCE_STRUCTURES = ("partitioned", "gap")
FUNCTIONAL_KINDS = ("point", "mean")
REPORT_FORMATS = ("text", "markdown", "json")
_FLOAT_TYPES = (float, Optional[float])


@dataclass
class AppConfig:
    log_level: str = "info"
    log_file: str = "logs/fracmemory.log"
    threads: Optional[int] = None


@dataclass
class OperatorConfig:
    length: float = math.pi
    # 常数、CSV 路径 (x, a(x)) 或采样列表
    potential: Any = 0.0
    mode_count: int = 8
    mesh_size: int = 512

    def to_spec(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MeasureConfig:
    atoms: List[List[float]] = field(default_factory=lambda: [[1.0, 1.0]])
    density: Optional[str] = None
    density_scale: float = 1.0
    # 合成特征值时使用的平移 μ_k + η
    eta: float = 0.0

    def to_spec(self) -> Dict[str, Any]:
        return {
            "atoms": self.atoms,
            "density": self.density,
            "density_scale": self.density_scale,
        }


@dataclass
class KernelConfig:
    family: str = "power_law"
    c: float = 1.0
    alpha: float = 0.5
    lam: float = 1.0
    atoms: List[List[float]] = field(default_factory=list)
    path: Optional[str] = None
    value: float = 1.0
    t_end: Optional[float] = None

    def to_spec(self, t_end: float) -> Dict[str, Any]:
        return {
            "family": self.family,
            "c": self.c,
            "alpha": self.alpha,
            "lambda": self.lam,
            "atoms": self.atoms,
            "path": self.path,
            "value": self.value,
            "t_end": self.t_end if self.t_end is not None else t_end,
        }


@dataclass
class GridConfig:
    T: float = 4.0
    N: int = 256
    t0: Optional[float] = None
    t1: Optional[float] = None


@dataclass
class InitialConfig:
    # u_k(0)，不足 K 个时补零
    coefficients: List[float] = field(default_factory=list)


@dataclass
class SourceBlockConfig:
    start: float
    end: float
    profile: str = "indicator"
    slope: float = 1.0
    # 模态向量 w，不足 K 个分量时补零
    modes: List[float] = field(default_factory=lambda: [1.0])

    def to_spec(self) -> Dict[str, Any]:
        return {
            "profile": self.profile,
            "start": self.start,
            "end": self.end,
            "slope": self.slope,
        }


@dataclass
class SourceConfig:
    structure: str = "partitioned"
    blocks: List[SourceBlockConfig] = field(default_factory=list)
    history: List[SourceBlockConfig] = field(default_factory=list)


@dataclass
class FunctionalConfig:
    kind: str = "point"
    x0: float = math.pi / math.sqrt(11.0)
    a: float = 0.0
    b: float = math.pi

    def to_spec(self) -> Dict[str, Any]:
        if self.kind == "point":
            return {"kind": "point", "x0": self.x0}
        return {"kind": "mean", "a": self.a, "b": self.b}


@dataclass
class NoiseConfig:
    level: float = 0.0


@dataclass
class RegularizationConfig:
    epsilon: Optional[float] = None
    noise: Optional[float] = None
    tikhonov: float = 1e-8
    spread_threshold: float = 0.05
    proportionality_tolerance: float = 1e-3
    smoothing_width: int = 5
    grid_points: int = 8
    polish_count: int = 4
    misfit_tolerance: float = 1e-8
    completely_monotone: bool = True

    def to_settings(self) -> RegularizationSettings:
        return RegularizationSettings(**asdict(self))


@dataclass
class OutputConfig:
    directory: str = "results"
    report_format: str = "text"
    snapshot_times: List[float] = field(default_factory=list)
    snapshot_points: int = 101


@dataclass
class ExperimentConfig:
    app: AppConfig = field(default_factory=AppConfig)
    operator: OperatorConfig = field(default_factory=OperatorConfig)
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    functional: FunctionalConfig = field(default_factory=FunctionalConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    regularization: RegularizationConfig = field(default_factory=RegularizationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0


def default_config_dict() -> Dict[str, Any]:
    """默认实验：幂律核、Dirichlet 拉普拉斯、两块分块源项"""
    config = ExperimentConfig(
        grid=GridConfig(T=4.0, N=256, t0=1.0, t1=1.5),
        source=SourceConfig(
            blocks=[
                SourceBlockConfig(start=1.5, end=2.5, modes=[1.0, 0.5, 0.25, 0.125]),
                SourceBlockConfig(start=2.5, end=4.0, modes=[0.5, 1.0, 1.0, 1.0]),
            ],
            history=[SourceBlockConfig(start=0.0, end=0.5, modes=[1.0])],
        )
    )
    return ConfigManager.to_dict(config)


def _section(
    cls: Any, raw: Any, path: str, nested: Optional[Dict[str, Any]] = None
) -> Any:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(path, "必须是映射")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "未知的配置项")
    values = dict(raw)
    for f in fields(cls):
        if f.type in _FLOAT_TYPES and isinstance(values.get(f.name), str):
            values[f.name] = _number(values[f.name], f"{path}.{f.name}")
    for name, builder in (nested or {}).items():
        if name in values:
            values[name] = builder(values[name], f"{path}.{name}")
    try:
        return cls(**values)
    except TypeError as e:
        missing = [
            f.name
            for f in fields(cls)
            if f.name not in values
            and f.default is MISSING
            and f.default_factory is MISSING
        ]
        target = f"{path}.{missing[0]}" if missing else path
        raise ConfigError(target, f"缺少必填项或类型错误: {e}") from e


def _blocks(raw: Any, path: str) -> List[SourceBlockConfig]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError(path, "必须是列表")
    return [
        cast(SourceBlockConfig, _section(SourceBlockConfig, item, f"{path}[{index}]"))
        for index, item in enumerate(raw)
    ]


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(path, message)


def _number(value: Any, path: str) -> float:
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(path, f"必须是数值，得到 {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"必须是数值，得到 {value!r}")
    return float(value)


def _integer(value: Any, path: str, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(path, f"必须是不小于 {minimum} 的整数")


class ConfigManager:
    def __init__(self, config_path: str = "config.yaml"):
        self.config_path = config_path
        self.config: Optional[ExperimentConfig] = None
        self.raw: Dict[str, Any] = {}

    def load_config(self, overrides: Sequence[str] = ()) -> ExperimentConfig:
        """加载配置文件，应用 key.path=value 覆盖后校验"""
        raw = self._load_config_dict()
        raw = self.apply_overrides(raw, overrides)
        self.raw = raw
        self.config = self.parse(raw)
        return self.config

    def get_config(self) -> ExperimentConfig:
        """获取配置对象"""
        if self.config is None:
            self.load_config()
        return cast(ExperimentConfig, self.config)

    @staticmethod
    def apply_overrides(
        raw: Dict[str, Any], overrides: Sequence[str]
    ) -> Dict[str, Any]:
        result = copy.deepcopy(raw)
        for item in overrides:
            if "=" not in item:
                raise ConfigError(item, "覆盖项必须是 key.path=value 形式")
            key, text = item.split("=", 1)
            parts = [part for part in key.strip().split(".") if part]
            if not parts:
                raise ConfigError(item, "覆盖项缺少键名")
            node = result
            for part in parts[:-1]:
                child = node.get(part)
                if child is None:
                    child = node[part] = {}
                if not isinstance(child, dict):
                    raise ConfigError(".".join(parts), "无法覆盖非映射节点的子项")
                node = child
            node[parts[-1]] = yaml.load(text, Loader=ConfigLoader)
            logger.debug(f"配置覆盖: {key} = {node[parts[-1]]!r}")
        return result

    @classmethod
    def parse(cls, raw: Optional[Dict[str, Any]]) -> ExperimentConfig:
        """解析并校验配置字典"""
        raw = dict(raw or {})
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(unknown[0], "未知的配置段")
        seed = raw.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed", "必须是非负整数")
        config = ExperimentConfig(
            app=_section(AppConfig, raw.get("app"), "app"),
            operator=_section(OperatorConfig, raw.get("operator"), "operator"),
            measure=_section(MeasureConfig, raw.get("measure"), "measure"),
            kernel=_section(KernelConfig, raw.get("kernel"), "kernel"),
            grid=_section(GridConfig, raw.get("grid"), "grid"),
            initial=_section(InitialConfig, raw.get("initial"), "initial"),
            source=_section(
                SourceConfig,
                raw.get("source"),
                "source",
                {"blocks": _blocks, "history": _blocks},
            ),
            functional=_section(FunctionalConfig, raw.get("functional"), "functional"),
            noise=_section(NoiseConfig, raw.get("noise"), "noise"),
            regularization=_section(
                RegularizationConfig, raw.get("regularization"), "regularization"
            ),
            output=_section(OutputConfig, raw.get("output"), "output"),
            seed=seed,
        )
        cls.validate(config)
        return config

    @staticmethod
    def validate(config: ExperimentConfig) -> None:
        """模式校验，错误信息带点号字段路径"""
        grid = config.grid
        T = _number(grid.T, "grid.T")
        _require(T > 0.0, "grid.T", "必须为正")
        _require(
            isinstance(grid.N, int) and grid.N >= 64, "grid.N", "必须是不小于 64 的整数"
        )
        if grid.t0 is not None or grid.t1 is not None:
            _require(grid.t0 is not None, "grid.t0", "给出 t1 时必须同时给出 t0")
            _require(grid.t1 is not None, "grid.t1", "给出 t0 时必须同时给出 t1")
            t0 = _number(grid.t0, "grid.t0")
            t1 = _number(grid.t1, "grid.t1")
            _require(0.0 < t0, "grid.t0", "必须满足 0 < t0")
            _require(t0 < t1, "grid.t1", "必须满足 t0 < t1")
            _require(t1 < T, "grid.t1", "必须满足 t1 < T")

        kernel = config.kernel
        _require(
            kernel.family in KERNEL_FAMILIES,
            "kernel.family",
            f"未知的核族 {kernel.family!r}，可选 {', '.join(KERNEL_FAMILIES)}",
        )
        if kernel.family in ("power_law", "tempered"):
            _require(_number(kernel.c, "kernel.c") > 0.0, "kernel.c", "必须为正")
            alpha = _number(kernel.alpha, "kernel.alpha")
            _require(0.0 < alpha < 1.0, "kernel.alpha", "必须位于 (0, 1)")
        if kernel.family == "tempered":
            _require(_number(kernel.lam, "kernel.lam") > 0.0, "kernel.lam", "必须为正")
        if kernel.family == "distributed_order":
            _require(bool(kernel.atoms), "kernel.atoms", "分布阶核至少需要一个原子")
        if kernel.family == "tabulated":
            _require(bool(kernel.path), "kernel.path", "表格核需要 CSV 路径")
        if kernel.family == "constant":
            value = _number(kernel.value, "kernel.value")
            _require(value > 0.0, "kernel.value", "必须为正")

        operator = config.operator
        length = _number(operator.length, "operator.length")
        _require(length > 0.0, "operator.length", "必须为正")
        _require(
            isinstance(operator.mode_count, int) and operator.mode_count >= 1,
            "operator.mode_count",
            "必须是正整数",
        )
        if isinstance(operator.potential, (int, float)):
            _require(operator.potential <= 0.0, "operator.potential", "势函数必须非正")
        elif isinstance(operator.potential, list):
            _require(
                all(
                    _number(v, "operator.potential") <= 0.0
                    for v in operator.potential
                ),
                "operator.potential",
                "势函数必须非正",
            )
        elif not isinstance(operator.potential, str):
            raise ConfigError("operator.potential", "必须是常数、CSV 路径或采样列表")

        for index, atom in enumerate(config.measure.atoms):
            path = f"measure.atoms[{index}]"
            _require(
                isinstance(atom, list) and len(atom) == 2, path, "必须是 [指数, 权重]"
            )
            _require(0.0 < _number(atom[0], path) <= 1.0, path, "指数必须位于 (0, 1]")
            _require(_number(atom[1], path) > 0.0, path, "权重必须为正")

        structure = config.source.structure
        _require(
            structure in SOURCE_STRUCTURES,
            "source.structure",
            f"必须是 {', '.join(SOURCE_STRUCTURES)} 之一",
        )
        for name in ("blocks", "history"):
            for index, block in enumerate(getattr(config.source, name)):
                path = f"source.{name}[{index}]"
                _require(
                    block.profile in PROFILE_KINDS, f"{path}.profile", "未知的剖面"
                )
                start = _number(block.start, f"{path}.start")
                end = _number(block.end, f"{path}.end")
                _require(
                    0.0 <= start < end <= T,
                    f"{path}.end",
                    "必须满足 0 ≤ start < end ≤ T",
                )

        functional = config.functional
        _require(
            functional.kind in FUNCTIONAL_KINDS,
            "functional.kind",
            "必须是 point 或 mean",
        )
        if functional.kind == "point":
            x0 = _number(functional.x0, "functional.x0")
            _require(0.0 < x0 < length, "functional.x0", "观测点必须位于区域内部")
        else:
            a = _number(functional.a, "functional.a")
            b = _number(functional.b, "functional.b")
            _require(0.0 <= a < b <= length, "functional.b", "必须满足 0 ≤ a < b ≤ ℓ")

        level = _number(config.noise.level, "noise.level")
        _require(level >= 0.0, "noise.level", "必须非负")
        reg = config.regularization
        for name in ("epsilon", "noise", "tikhonov", "misfit_tolerance"):
            value = getattr(reg, name)
            if value is None and name in ("epsilon", "noise"):
                continue
            path = f"regularization.{name}"
            _require(_number(value, path) >= 0.0, path, "必须非负")
        for name in ("spread_threshold", "proportionality_tolerance"):
            path = f"regularization.{name}"
            _require(_number(getattr(reg, name), path) > 0.0, path, "必须为正")
        _integer(reg.smoothing_width, "regularization.smoothing_width", 1)
        _integer(reg.grid_points, "regularization.grid_points", 2)
        _integer(reg.polish_count, "regularization.polish_count", 1)
        _require(
            isinstance(reg.completely_monotone, bool),
            "regularization.completely_monotone",
            "必须是布尔值",
        )
        _require(
            config.output.report_format in REPORT_FORMATS,
            "output.report_format",
            f"必须是 {', '.join(REPORT_FORMATS)} 之一",
        )
        threads = config.app.threads
        if threads is not None:
            _require(
                isinstance(threads, int) and threads >= 1, "app.threads", "必须是正整数"
            )

    @staticmethod
    def to_dict(config: ExperimentConfig) -> Dict[str, Any]:
        return asdict(config)

    @classmethod
    def config_hash(cls, config: ExperimentConfig) -> str:
        """规范化 YAML（键排序）的 SHA-256"""
        text = yaml.safe_dump(cls.to_dict(config), sort_keys=True, allow_unicode=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _create_default_config(self) -> None:
        """创建默认配置文件"""
        directory = os.path.dirname(self.config_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(self.config_path, "w", encoding="utf-8") as f:
            yaml.safe_dump(
                default_config_dict(), f, default_flow_style=False, allow_unicode=True
            )
        logger.info(f"配置文件不存在，已写出默认配置: {self.config_path}")

    def _load_config_dict(self) -> Dict[str, Any]:
        """加载配置字典"""
        if not os.path.exists(self.config_path):
            self._create_default_config()

        with open(self.config_path, "r", encoding="utf-8") as f:
            try:
                data = yaml.load(f, Loader=ConfigLoader)
            except yaml.YAMLError as e:
                raise ConfigError(self.config_path, f"YAML 解析失败: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(self.config_path, "顶层必须是映射")
        return cast(Dict[str, Any], data)
