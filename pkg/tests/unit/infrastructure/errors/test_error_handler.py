import pytest

from src.infrastructure.errors.error_handler import (
    EXIT_CODES,
    ErrorCategory,
    ErrorHandler,
    ErrorSeverity,
)
from src.infrastructure.errors.exceptions import (
    ConfigError,
    ContourError,
    DomainError,
    FracMemoryError,
    IllConditionedError,
    InconsistencyError,
    ModeSolveError,
    PreconditionError,
    UnsupportedVariantError,
)


@pytest.fixture
def error_handler():
    return ErrorHandler()


@pytest.mark.parametrize(
    "error,category,exit_code",
    [
        (ConfigError("grid.N", "必须为正"), ErrorCategory.CONFIGURATION, 2),
        (DomainError("α 超出范围"), ErrorCategory.DOMAIN, 3),
        (PreconditionError("网格标记缺失"), ErrorCategory.PRECONDITION, 3),
        (UnsupportedVariantError("不支持"), ErrorCategory.PRECONDITION, 3),
        (IllConditionedError("对角元为零"), ErrorCategory.NUMERICAL, 3),
        (ContourError("节点失败"), ErrorCategory.NUMERICAL, 3),
        (ZeroDivisionError("除零"), ErrorCategory.NUMERICAL, 3),
        (InconsistencyError("不成比例"), ErrorCategory.INCONSISTENCY, 3),
        (RuntimeError("意外"), ErrorCategory.UNKNOWN, 1),
    ],
)
def test_classification_and_exit_codes(error_handler, error, category, exit_code):
    info = error_handler.handle_error(error, {"command": "simulate"})
    assert info.category == category
    assert info.exit_code == exit_code
    assert EXIT_CODES[category] == exit_code
    assert info.details["command"] == "simulate"


def test_config_error_keeps_field_path(error_handler):
    error = ConfigError("kernel.alpha", "必须位于 (0, 1)")
    info = error_handler.handle_error(error, {})
    assert info.details["field_path"] == "kernel.alpha"
    assert "kernel.alpha" in info.message
    assert info.severity == ErrorSeverity.MEDIUM


def test_details_are_merged(error_handler):
    error = ModeSolveError(3, "对角权重不可逆", {"h": 0.01})
    info = error_handler.handle_error(error, {"stage": "simulate"})
    assert info.details == {"stage": "simulate", "h": 0.01}
    assert info.message.startswith("模态 3")
    assert info.severity == ErrorSeverity.HIGH


def test_unknown_errors_are_critical(error_handler):
    info = error_handler.handle_error(KeyError("x"), {})
    assert info.severity == ErrorSeverity.CRITICAL


def test_history(error_handler):
    error_handler.handle_error(DomainError("a"), {})
    error_handler.handle_error(InconsistencyError("b"), {})
    error_handler.handle_error(DomainError("c"), {})
    assert len(error_handler.get_error_history()) == 3
    assert len(error_handler.get_errors_by_category(ErrorCategory.DOMAIN)) == 2
    error_handler.clear_error_history()
    assert error_handler.get_error_history() == []


def test_exception_hierarchy():
    error = FracMemoryError("基类", {"a": 1})
    assert error.message == "基类"
    assert error.details == {"a": 1}
    assert isinstance(DomainError("x"), ValueError)
    assert isinstance(IllConditionedError("x"), ArithmeticError)
