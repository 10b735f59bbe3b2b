from typing import Any, Dict, List, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from src import __version__


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


class RichConsole:
    """rich美化终端"""

    def __init__(self, console: Console | None = None) -> None:
        self.console = console or Console()

    def print_welcome(self) -> None:
        """打印欢迎信息"""
        welcome_text = (
            f"广义分数阶扩散的正反问题求解器 (fracmemory) 版本 {__version__}\n"
            "正问题模拟、核恢复、乘积恢复、历史恢复与分布阶测度恢复"
        )
        self.console.print(Panel(welcome_text, style="bold blue"))

    def print_summary(self, title: str, summary: Dict[str, Any]) -> None:
        """以两列表格打印子命令摘要"""
        table = Table(title=title)
        table.add_column("指标", style="cyan")
        table.add_column("值", style="magenta")
        for key, value in summary.items():
            table.add_row(str(key), _format_value(value))
        self.console.print(table)

    def print_files(self, files: Sequence[str]) -> None:
        """打印输出文件列表"""
        if not files:
            return
        self.console.print(
            Panel(Text("\n".join(files)), title="输出文件", style="green")
        )

    def print_report(self, report: str) -> None:
        """打印报告"""
        self.console.print(Panel(Text(report), title="恢复报告", style="yellow"))

    def print_error(self, error: str) -> None:
        """打印错误"""
        self.console.print(Panel(Text(error), title="错误", style="bold red"))

    def print_warning(self, warning: str) -> None:
        """打印警告"""
        self.console.print(Panel(Text(warning), title="警告", style="bold yellow"))

    def print_info(self, info: str) -> None:
        """打印信息"""
        self.console.print(Panel(Text(info), title="信息", style="bold blue"))

    def print_table(self, data: List[Dict[str, Any]], title: str) -> None:
        """打印表格"""
        if not data:
            return

        table = Table(title=title)
        for key in data[0].keys():
            table.add_column(key)

        for row in data:
            table.add_row(*[_format_value(v) for v in row.values()])

        self.console.print(table)
