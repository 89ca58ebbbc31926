"""
实验包 - 配置驱动的子命令
"""

from .base import Experiment
from .config_loader import ExperimentConfig, config_hash, load_config, load_source, parse_config
from .manager import ExperimentManager
from .output import ExperimentOutputManager, configure_output, get_output_manager

__all__ = ['Experiment', 'ExperimentConfig', 'ExperimentManager', 'ExperimentOutputManager',
           'config_hash', 'load_config', 'load_source', 'parse_config', 'configure_output',
           'get_output_manager']
