"""异常层次

所有数值模块抛出的异常都以 FracMemoryError 为根，
CLI 根据异常类别映射退出码。
"""

from typing import Any, Dict, Optional


class FracMemoryError(Exception):
    """项目异常基类"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})


class ConfigError(FracMemoryError):
    """配置文件不符合模式"""

    def __init__(
        self,
        field_path: str,
        message: str,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(f"{field_path}: {message}", details)
        self.field_path = field_path


class DomainError(FracMemoryError, ValueError):
    """参数超出定义域"""


class PreconditionError(FracMemoryError, ValueError):
    """前置条件不满足"""


class UnsupportedVariantError(PreconditionError):
    """该核类型不支持此操作"""


class NumericalError(FracMemoryError, ArithmeticError):
    """数值计算失败"""


class IllConditionedError(NumericalError):
    """三角系统病态或奇异"""


class StepSizeError(NumericalError):
    """时间步长过大，对角权重不可逆"""


class ContourError(NumericalError):
    """围道积分节点求值失败或求和发散"""


class PoleError(NumericalError):
    """变换分母为零"""


class EigenSolverError(NumericalError):
    """特征值求解失败"""


class ModelOrderError(NumericalError):
    """剥离残差不再下降，原子数超过可分辨范围"""


class ObservabilityError(NumericalError):
    """观测泛函零化了所有被激发的模态"""


class ModeSolveError(NumericalError):
    """单个模态求解失败"""

    def __init__(
        self, mode: int, message: str, details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(f"模态 {mode}: {message}", details)
        self.mode = mode


class InconsistencyError(FracMemoryError):
    """数据与单一 (M, A) 模型不一致"""
