import logging
import uuid
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List

from src.infrastructure.errors.exceptions import (
    ConfigError,
    DomainError,
    InconsistencyError,
    NumericalError,
    PreconditionError,
)

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """错误严重程度"""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """错误类别"""

    CONFIGURATION = "configuration"
    DOMAIN = "domain"
    PRECONDITION = "precondition"
    NUMERICAL = "numerical"
    INCONSISTENCY = "inconsistency"
    UNKNOWN = "unknown"


EXIT_CODES: Dict[ErrorCategory, int] = {
    ErrorCategory.CONFIGURATION: 2,
    ErrorCategory.DOMAIN: 3,
    ErrorCategory.PRECONDITION: 3,
    ErrorCategory.NUMERICAL: 3,
    ErrorCategory.INCONSISTENCY: 3,
    ErrorCategory.UNKNOWN: 1,
}


@dataclass
class ErrorInfo:
    """错误信息"""

    error_id: str
    category: ErrorCategory
    severity: ErrorSeverity
    message: str
    details: Dict[str, Any]
    timestamp: datetime
    exit_code: int


class ErrorHandler:
    """错误处理器：分类异常并给出退出码"""

    def __init__(self) -> None:
        self.error_history: List[ErrorInfo] = []

    def handle_error(self, error: Exception, context: Dict[str, Any]) -> ErrorInfo:
        """处理错误"""
        category = self._classify_error(error)
        details = dict(context)
        details.update(getattr(error, "details", {}) or {})
        if isinstance(error, ConfigError):
            details["field_path"] = error.field_path

        error_info = ErrorInfo(
            error_id=str(uuid.uuid4()),
            category=category,
            severity=self._determine_severity(category),
            message=str(error),
            details=details,
            timestamp=datetime.now(),
            exit_code=EXIT_CODES[category],
        )
        self.error_history.append(error_info)
        logger.error(f"[{category.value}] {error_info.message}")
        return error_info

    def _classify_error(self, error: Exception) -> ErrorCategory:
        """分类错误"""
        # 子类顺序：ConfigError 必须先于其它判断
        if isinstance(error, ConfigError):
            return ErrorCategory.CONFIGURATION
        if isinstance(error, PreconditionError):
            return ErrorCategory.PRECONDITION
        if isinstance(error, DomainError):
            return ErrorCategory.DOMAIN
        if isinstance(error, NumericalError):
            return ErrorCategory.NUMERICAL
        if isinstance(error, InconsistencyError):
            return ErrorCategory.INCONSISTENCY
        if isinstance(error, (FloatingPointError, ZeroDivisionError)):
            return ErrorCategory.NUMERICAL
        return ErrorCategory.UNKNOWN

    def _determine_severity(self, category: ErrorCategory) -> ErrorSeverity:
        """确定错误严重程度"""
        if category == ErrorCategory.UNKNOWN:
            return ErrorSeverity.CRITICAL
        if category in (ErrorCategory.NUMERICAL, ErrorCategory.INCONSISTENCY):
            return ErrorSeverity.HIGH
        return ErrorSeverity.MEDIUM

    def get_error_history(self) -> List[ErrorInfo]:
        """获取错误历史"""
        return self.error_history.copy()

    def clear_error_history(self) -> None:
        """清空错误历史"""
        self.error_history.clear()

    def get_errors_by_category(self, category: ErrorCategory) -> List[ErrorInfo]:
        """按类别获取错误"""
        return [e for e in self.error_history if e.category == category]
