from src.core.reporter.csv_writer import (
    build_manifest,
    file_sha256,
    read_csv,
    write_csv,
    write_manifest,
    write_matrix,
)
from src.core.reporter.report_generator import (
    ReportFormat,
    ReportGenerator,
    report_payload,
    to_jsonable,
)

__all__ = [
    "ReportFormat",
    "ReportGenerator",
    "build_manifest",
    "file_sha256",
    "read_csv",
    "report_payload",
    "to_jsonable",
    "write_csv",
    "write_manifest",
    "write_matrix",
]
