"""
实验输出管理器 - 统一管理结果文件与命令行摘要
所有文件第一行是带 config hash 的注释行，CSV 第二行是列名
"""

import csv
import json
import time
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

import config
from errors import OutputError, to_jsonable
from fields.tangent import TangentField
from logger_config import setup_logger
from surface.base import SurfaceGeometry
from surface.mesh_io import write_obj, write_off

logger = setup_logger(__name__)

PathLike = Union[str, Path]


class ExperimentOutputManager:
    """实验输出管理器"""

    def __init__(self, output_config: Optional[Dict[str, Any]] = None):
        output_config = {**config.OUTPUT_CONFIG, **(output_config or {})}
        self.schema_version = int(output_config['schema_version'])
        self.float_format = output_config['float_format']

        # 命令行输出配置
        self.enable_console_output = output_config.get('enable_console_output', True)
        self.console_format = output_config.get('console_format', 'simple')
        self.written: List[Path] = []

    def header_comment(self, config_hash: str) -> str:
        return f"glvortex schema={self.schema_version} config_hash={config_hash}"

    def _cell(self, value: Any) -> Any:
        if isinstance(value, (bool, np.bool_)):
            return int(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            return self.float_format % float(value)
        return value

    def _prepare(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(path)
        return path

    # ------------------------------------------------------------------
    # 文件
    # ------------------------------------------------------------------
    def write_csv(self, path: PathLike, columns: Sequence[str], rows: Iterable[Sequence[Any]],
                  config_hash: str) -> Path:
        """
        写出 CSV
        Args:
            path: 目标文件
            columns: 列名
            rows: 数据行（浮点数按 float_format 格式化）
            config_hash: 实验配置 hash
        """
        path = self._prepare(path)
        with path.open('w', newline='', encoding='utf-8') as f:
            f.write(f"# {self.header_comment(config_hash)}\n")
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(list(columns))
            count = 0
            for row in rows:
                if len(row) != len(columns):
                    raise OutputError(f"{path.name}: 行长度与列数不一致",
                                      diagnostic={'row': count, 'length': len(row), 'columns': len(columns)})
                writer.writerow([self._cell(v) for v in row])
                count += 1
        logger.debug(f"写出 {path}（{count} 行）")
        return path

    def write_json(self, path: PathLike, record: Dict[str, Any], config_hash: str) -> Path:
        """写出 JSON 报告（带 schema_version 与 config_hash）"""
        path = self._prepare(path)
        payload = {'schema_version': self.schema_version, 'config_hash': config_hash, **to_jsonable(record)}
        with path.open('w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write('\n')
        logger.debug(f"写出 {path}")
        return path

    def write_field(self, path: PathLike, u: TangentField, config_hash: str) -> Path:
        """场快照：vertex, re, im"""
        rows = ((v, z.real, z.imag) for v, z in enumerate(u.values))
        return self.write_csv(path, ['vertex', 're', 'im'], rows, config_hash)

    def write_ambient_field(self, path: PathLike, geom: SurfaceGeometry, u: TangentField, config_hash: str) -> Path:
        """R³ 中的场：vertex, x, y, z, u_x, u_y, u_z"""
        vectors = u.to_ambient(geom)
        rows = ((v, *geom.vertices[v], *vectors[v]) for v in range(geom.n_vertices))
        return self.write_csv(path, ['vertex', 'x', 'y', 'z', 'u_x', 'u_y', 'u_z'], rows, config_hash)

    def write_cochain(self, path: PathLike, values: np.ndarray, config_hash: str, entity: str = 'id') -> Path:
        """上链：entity id, value"""
        rows = ((k, float(x)) for k, x in enumerate(np.asarray(values, dtype=float)))
        return self.write_csv(path, [entity, 'value'], rows, config_hash)

    def write_mesh(self, path: PathLike, geom: SurfaceGeometry, config_hash: str) -> Path:
        """按扩展名写出 OFF 或 OBJ"""
        path = self._prepare(path)
        writer = write_obj if path.suffix.lower() == '.obj' else write_off
        writer(path, geom.vertices, geom.faces, comment=self.header_comment(config_hash))
        return path

    # ------------------------------------------------------------------
    # 命令行
    # ------------------------------------------------------------------
    def output_result(self, command: str, summary: Dict[str, Any]):
        """打印命令结果摘要"""
        if not self.enable_console_output:
            return
        print(f"[RESULT] {self._create_message(command, summary, self.console_format)}")

    def output_error(self, error_record: Dict[str, Any]):
        """错误记录总是以 JSON 打印，便于脚本解析"""
        print(json.dumps(to_jsonable(error_record), ensure_ascii=False, sort_keys=True))

    def _create_message(self, command: str, summary: Dict[str, Any], format_type: str) -> str:
        if format_type == 'json':
            output_data = {'timestamp': time.time(), 'command': command, 'summary': to_jsonable(summary)}
            return json.dumps(output_data, ensure_ascii=False, sort_keys=True)
        parts = []
        for key, value in summary.items():
            if isinstance(value, float):
                parts.append(f"{key}={value:.6g}")
            elif isinstance(value, (dict, list)):
                continue
            else:
                parts.append(f"{key}={value}")
        return f"{command}: " + " ".join(parts)


# 全局输出管理器实例
_output_manager = None


def get_output_manager() -> ExperimentOutputManager:
    """获取全局输出管理器实例"""
    global _output_manager
    if _output_manager is None:
        _output_manager = ExperimentOutputManager()
    return _output_manager


def configure_output(output_config: Optional[Dict[str, Any]] = None) -> ExperimentOutputManager:
    """按实验的 output 小节重建全局输出管理器"""
    global _output_manager
    _output_manager = ExperimentOutputManager(output_config)
    return _output_manager
