"""
实验配置加载 - 单个 JSON 文件描述一次可归档的实验
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import config
from errors import ConfigError
from logger_config import setup_logger

logger = setup_logger(__name__)

# 实验 JSON 小节 → config.py 中的默认值
SECTIONS = {
    'flow': 'FLOW_CONFIG',
    'tracking': 'TRACKING_CONFIG',
    'renormalized': 'RENORMALIZED_CONFIG',
    'core': 'CORE_CONFIG',
    'effective': 'EFFECTIVE_CONFIG',
    'dec': 'DEC_CONFIG',
    'output': 'OUTPUT_CONFIG',
}

MESH_SUFFIXES = ('.off', '.obj')

ENERGY_DEFAULTS = {
    'vortex': 0,            # 扫描哪个涡旋
    'grid': 5,              # 网格点数（每个方向）
    'span_cells': 4.0,      # 扫描半宽（网格单元数）
    'gradient': True,       # 是否同时输出 ∇W
    'fd_check': False,      # 是否输出有限差分梯度
}


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(raw: Dict[str, Any]) -> str:
    """规范 JSON 的 SHA-256 前 16 位"""
    return hashlib.sha256(canonical_json(raw).encode("utf-8")).hexdigest()[:16]


@dataclass
class ExperimentConfig:
    """
    一次实验的全部输入
    Args:
        name: 实验名
        surface: 曲面描述字典或网格文件路径
        vortices: {'points': [...], 'degrees': [...], 'integers' 或 'xi': [...]}
        theta0: 初始相位（None 表示 0，或逐顶点列表）
        epsilons: ε 列表（正且递减）
        model: 'extrinsic' 或 'intrinsic'
        seed: 初始位置扰动的随机种子
        perturbation: 扰动幅度（网格单元数，0 表示不扰动）
    """

    name: str
    surface: Union[Dict[str, Any], str]
    vortices: Dict[str, Any] = field(default_factory=dict)
    theta0: Optional[List[float]] = None
    epsilons: List[float] = field(default_factory=list)
    model: str = 'extrinsic'
    seed: int = 0
    perturbation: float = 0.0
    energy: Dict[str, Any] = field(default_factory=dict)
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict)
    source: Optional[str] = None

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    def section(self, name: str) -> Dict[str, Any]:
        """config.py 默认值按键被实验 JSON 覆盖后的小节"""
        defaults = getattr(config, SECTIONS[name])
        return {**defaults, **self.sections.get(name, {})}

    def overrides(self, name: str) -> Dict[str, Any]:
        """只含实验 JSON 中显式给出的键"""
        return dict(self.sections.get(name, {}))

    def degrees(self) -> List[int]:
        return [int(d) for d in self.vortices.get('degrees', [])]


def _require(condition: bool, message: str, **diagnostic):
    if not condition:
        raise ConfigError(message, diagnostic=diagnostic)


def parse_config(raw: Dict[str, Any], source: Optional[str] = None) -> ExperimentConfig:
    """
    校验并解析配置字典
    Raises:
        ConfigError: 字段缺失或取值无效
    """
    _require(isinstance(raw, dict), "配置根节点必须是对象")
    _require('surface' in raw, "配置缺少 surface 字段")
    surface = raw['surface']
    _require(isinstance(surface, (dict, str)), "surface 必须是描述对象或网格路径")

    vortices = raw.get('vortices', {}) or {}
    points = vortices.get('points', [])
    degrees = vortices.get('degrees', [])
    _require(len(points) == len(degrees), "涡旋位置与度数数量不一致",
             points=len(points), degrees=len(degrees))
    _require(all(isinstance(d, int) and not isinstance(d, bool) for d in degrees), "度数必须是整数",
             degrees=degrees)
    _require(not ('integers' in vortices and 'xi' in vortices), "integers 与 xi 只能给一个")

    epsilons = [float(e) for e in raw.get('epsilons', [config.FLOW_CONFIG['epsilon']])]
    _require(all(e > 0 for e in epsilons), "ε 必须为正", epsilons=epsilons)
    _require(all(a > b for a, b in zip(epsilons, epsilons[1:])), "ε 列表必须严格递减", epsilons=epsilons)

    model = raw.get('model', config.FLOW_CONFIG['model'])
    _require(model in ('extrinsic', 'intrinsic'), f"未知能量模型: {model}")

    sections = {}
    for name in SECTIONS:
        section = raw.get(name, {}) or {}
        _require(isinstance(section, dict), f"{name} 小节必须是对象")
        for key, value in section.items():
            if key.endswith('tol') or key in ('dt', 'h', 'T'):
                _require(isinstance(value, (int, float)) and value >= 0 and (key == 'T' or value > 0),
                         f"{name}.{key} 必须为正", value=value)
        sections[name] = dict(section)

    energy = {**ENERGY_DEFAULTS, **(raw.get('energy', {}) or {})}
    _require(int(energy['grid']) >= 1, "energy.grid 至少为 1")
    perturbation = float(raw.get('perturbation', 0.0))
    _require(perturbation >= 0, "perturbation 不能为负")

    return ExperimentConfig(
        name=str(raw.get('name', Path(source).stem if source else 'experiment')),
        surface=surface,
        vortices=dict(vortices),
        theta0=raw.get('theta0'),
        epsilons=epsilons,
        model=model,
        seed=int(raw.get('seed', 0)),
        perturbation=perturbation,
        energy=energy,
        sections=sections,
        raw=raw,
        source=source,
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    读取实验 JSON
    Raises:
        ConfigError: 文件不存在或不是合法 JSON
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("配置文件不存在", diagnostic={'path': str(path)})
    try:
        with path.open('r', encoding='utf-8') as f:
            raw = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError("配置文件不是合法 JSON", diagnostic={'path': str(path), 'line': exc.lineno}) from exc
    if isinstance(raw, dict) and 'surface' not in raw and 'kind' in raw:
        # 只有曲面描述（info 子命令）
        raw = {'name': path.stem, 'surface': raw}
    experiment = parse_config(raw, source=str(path))
    logger.info(f"加载实验配置 {experiment.name}（hash {experiment.hash}）")
    return experiment


def load_source(path: Union[str, Path]) -> ExperimentConfig:
    """--config 的值可以是实验 JSON、曲面描述 JSON 或 OFF/OBJ 网格"""
    path = Path(path)
    if path.suffix.lower() in MESH_SUFFIXES:
        if not path.exists():
            raise ConfigError("网格文件不存在", diagnostic={'path': str(path)})
        return parse_config({'name': path.stem, 'surface': path.name}, source=str(path))
    return load_config(path)
