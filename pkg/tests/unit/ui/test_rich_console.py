from io import StringIO
from unittest.mock import patch

from rich.console import Console

from src.ui.rich_console import RichConsole


def _recording_console():
    return RichConsole(Console(file=StringIO(), width=120, color_system=None))


def _output(console):
    return console.console.file.getvalue()


class TestRichConsole:
    """测试RichConsole类"""

    def test_init(self) -> None:
        """测试初始化"""
        console = RichConsole()
        assert console.console is not None

    def test_print_welcome(self) -> None:
        """测试打印欢迎信息"""
        console = RichConsole()
        with patch.object(console.console, "print") as mock_print:
            console.print_welcome()
            mock_print.assert_called_once()

    def test_print_summary(self) -> None:
        """测试摘要表格的数值格式"""
        console = _recording_console()
        console.print_summary("simulate", {"max_residual": 1.23456789e-12, "N": 256})
        output = _output(console)
        assert "simulate" in output
        assert "1.23457e-12" in output
        assert "256" in output

    def test_print_summary_nested_list(self) -> None:
        """测试列表值逐项格式化"""
        console = _recording_console()
        console.print_summary("recover-measure", {"atoms": [[0.5, 2.0]]})
        assert "[[0.5, 2]]" in _output(console)

    def test_print_files(self) -> None:
        """测试打印输出文件"""
        console = _recording_console()
        console.print_files(["out/modes.csv", "out/manifest_simulate.json"])
        output = _output(console)
        assert "modes.csv" in output
        assert "输出文件" in output

    def test_print_files_empty(self) -> None:
        """测试无文件时不输出"""
        console = RichConsole()
        with patch.object(console.console, "print") as mock_print:
            console.print_files([])
            mock_print.assert_not_called()

    def test_print_error(self) -> None:
        """测试打印错误"""
        console = _recording_console()
        console.print_error("[configuration] grid.N: 必须为正")
        assert "grid.N" in _output(console)

    def test_print_warning_and_info(self) -> None:
        """测试打印警告与信息"""
        console = RichConsole()
        with patch.object(console.console, "print") as mock_print:
            console.print_warning("离散度超过阈值")
            console.print_info("完成")
            console.print_report("报告")
            assert mock_print.call_count == 3

    def test_print_table(self) -> None:
        """测试打印表格"""
        console = _recording_console()
        console.print_table([{"模态": 1, "残差": 1e-9}], "残差")
        assert "1e-09" in _output(console)

    def test_print_table_empty(self) -> None:
        """测试空表格"""
        console = RichConsole()
        with patch.object(console.console, "print") as mock_print:
            console.print_table([], "空")
            mock_print.assert_not_called()
