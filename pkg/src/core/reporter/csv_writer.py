"""结果文件的原子写入

CSV 以 %.17g 写出全部有效位，先写临时文件再 os.replace，
中途失败不会留下半个文件。
"""

import hashlib
import json
import os
import tempfile
from dataclasses import asdict
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from src.infrastructure.logging.logger import get_logger
from src.infrastructure.monitoring.run_monitor import RunMonitor
from src.models.entities import RunManifest
from src.utils.numerics import FloatArray

FLOAT_FORMAT = "%.17g"


def _atomic_write(path: str, write: Callable[[int], None]) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        write(handle)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    return path


def write_csv(path: str, columns: Mapping[str, Sequence[float]]) -> str:
    """按列写 CSV，第一行为列名；列长度必须一致"""
    names = list(columns)
    if not names:
        raise ValueError("至少需要一列")
    data = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])

    def write(handle: int) -> None:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as f:
            np.savetxt(
                f,
                data,
                delimiter=",",
                header=",".join(names),
                comments="",
                fmt=FLOAT_FORMAT,
            )

    _atomic_write(path, write)
    get_logger().debug(f"已写出 {path}: {data.shape[0]} 行 × {len(names)} 列")
    return path


def write_matrix(
    path: str, times: FloatArray, rows: FloatArray, prefix: str = "mode"
) -> str:
    """时间列加逐模态列：rows 形状 (K, N+1)"""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    columns: Dict[str, Sequence[float]] = {"t": times}
    for k, row in enumerate(rows, start=1):
        columns[f"{prefix}_{k}"] = row
    return write_csv(path, columns)


def read_csv(path: str) -> Dict[str, FloatArray]:
    """读回 write_csv 写出的文件"""
    table = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    names = table.dtype.names or ()
    return {name: np.atleast_1d(np.asarray(table[name], dtype=float)) for name in names}


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(
    command: str,
    config_hash: str,
    version: str,
    files: Sequence[str],
    monitor: Optional[RunMonitor] = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        config_hash=config_hash,
        version=version,
        files={os.path.basename(path): file_sha256(path) for path in files},
        timings=monitor.timings() if monitor is not None else {},
        peak_memory_mb=round(monitor.peak_rss_mb, 3) if monitor is not None else 0.0,
    )


def write_manifest(path: str, manifest: RunManifest) -> str:
    content = json.dumps(asdict(manifest), ensure_ascii=False, indent=2, sort_keys=True)

    def write(handle: int) -> None:
        with os.fdopen(handle, "w", encoding="utf-8") as f:
            f.write(content)

    return _atomic_write(path, write)
