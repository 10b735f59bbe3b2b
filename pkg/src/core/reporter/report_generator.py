import json
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

from src.infrastructure.logging.logger import get_logger
from src.models.entities import RecoveryReport

KIND_TITLES = {
    "kernel": "核恢复",
    "product": "核-算子乘积恢复",
    "history": "源项历史恢复",
    "functional": "参数族核恢复（标量观测）",
    "measure": "分布阶测度恢复",
    "kernel_measure": "核与分布阶测度联合恢复",
}


class ReportFormat:
    TEXT = "text"
    MARKDOWN = "markdown"
    JSON = "json"


def to_jsonable(value: Any) -> Any:
    """numpy 标量/数组、datetime 与非字符串键转换为 JSON 可表示的对象"""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, datetime):
        return value.isoformat(timespec="seconds")
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def report_payload(report: RecoveryReport) -> Dict[str, Any]:
    payload = {
        "kind": report.kind,
        "generated_at": report.generated_at,
        "gauge_constant": report.gauge_constant,
        "gauge_time": report.gauge_time,
        "unreliable_nodes": report.unreliable_nodes,
        "residuals": report.residuals,
        "parameters": report.parameters,
        "warnings": report.warnings,
        "diagnostics": report.diagnostics,
        "samples": {"times": report.times, "values": report.values},
    }
    return dict(to_jsonable(payload))


class ReportGenerator:
    """把 RecoveryReport 渲染为文本、Markdown 或 JSON"""

    def __init__(self) -> None:
        self.logger = get_logger()

    def render(self, report: RecoveryReport, format: str = ReportFormat.TEXT) -> str:
        if format == ReportFormat.TEXT:
            return self._render_text_report(report)
        if format == ReportFormat.MARKDOWN:
            return self._render_markdown_report(report)
        if format == ReportFormat.JSON:
            return json.dumps(report_payload(report), ensure_ascii=False, indent=2)
        raise ValueError(f"不支持的报告格式: {format}")

    def _summary_lines(self, report: RecoveryReport, bullet: str) -> List[str]:
        lines = [
            f"{bullet}生成时间: {report.generated_at:%Y-%m-%d %H:%M:%S}",
            f"{bullet}规范常数 c: {report.gauge_constant:.10g}",
        ]
        if report.gauge_time is not None:
            lines.append(f"{bullet}规范点 t_g: {report.gauge_time:.6g}")
        if report.unreliable_nodes:
            nodes = ", ".join(str(n) for n in report.unreliable_nodes)
            lines.append(f"{bullet}不可靠节点: {nodes}")
        lines.append(f"{bullet}样本数: {report.values.size}")
        return lines

    def _parameter_lines(self, report: RecoveryReport, bullet: str) -> List[str]:
        lines = []
        for name, value in report.parameters.items():
            if isinstance(value, float):
                lines.append(f"{bullet}{name}: {value:.10g}")
            else:
                lines.append(f"{bullet}{name}: {to_jsonable(value)}")
        return lines

    def _render_text_report(self, report: RecoveryReport) -> str:
        """渲染纯文本格式报告"""
        title = KIND_TITLES.get(report.kind, report.kind)
        parts = ["=" * 72, f"恢复报告 - {title}", "=" * 72, ""]
        parts.extend(self._summary_lines(report, ""))
        parts.append("")

        parts.append("各模态残差:")
        for mode, value in sorted(report.residuals.items()):
            parts.append(f"  模态 {mode}: {value:.6e}")
        parts.append("")

        if report.parameters:
            parts.append("参数:")
            parts.extend(self._parameter_lines(report, "  "))
            parts.append("")

        if report.warnings:
            parts.append("警告:")
            parts.extend(f"  - {message}" for message in report.warnings)
            parts.append("")
        parts.append("-" * 72)
        return "\n".join(parts)

    def _render_markdown_report(self, report: RecoveryReport) -> str:
        title = KIND_TITLES.get(report.kind, report.kind)
        parts = [f"# 恢复报告 - {title}", "", "## 概要", ""]
        parts.extend(self._summary_lines(report, "- "))
        parts.extend(["", "## 残差", "", "| 模态 | 残差 |", "| --- | --- |"])
        for mode, value in sorted(report.residuals.items()):
            parts.append(f"| {mode} | {value:.6e} |")
        if report.parameters:
            parts.extend(["", "## 参数", ""])
            parts.extend(self._parameter_lines(report, "- "))
        if report.warnings:
            parts.extend(["", "## 警告", ""])
            parts.extend(f"- {message}" for message in report.warnings)
        parts.append("")
        return "\n".join(parts)

    def save_report(
        self,
        report: RecoveryReport,
        file_path: Optional[str] = None,
        format: str = ReportFormat.TEXT,
    ) -> str:
        """保存报告到文件"""
        try:
            if not file_path:
                timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
                os.makedirs("reports", exist_ok=True)
                suffix = {"json": "json", "markdown": "md"}.get(format, "txt")
                file_path = f"reports/report_{report.kind}_{timestamp}.{suffix}"

            content = self.render(report, format)
            directory = os.path.dirname(file_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            temporary = f"{file_path}.tmp"
            with open(temporary, "w", encoding="utf-8") as f:
                f.write(content)
            os.replace(temporary, file_path)

            self.logger.info(f"报告已保存到: {file_path}")
            return file_path
        except Exception as e:
            self.logger.error(f"保存报告失败: {e}")
            raise
