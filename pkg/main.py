"""
glvortex 命令行入口
子命令: info, simulate, effective, compare, energy
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from errors import GLVortexError
from experiments.config_loader import ExperimentConfig, load_source
from experiments.manager import ExperimentManager
from experiments.output import get_output_manager
from logger_config import setup_logger

# 设置日志
logger = setup_logger(__name__)

COMMANDS = ('info', 'simulate', 'effective', 'compare', 'energy')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='glvortex', description="闭曲面上的 Ginzburg-Landau 涡旋动力学实验")
    parser.add_argument('command', choices=COMMANDS, help="子命令")
    parser.add_argument('--config', required=True, type=Path,
                        help="实验 JSON（info 也接受曲面描述 JSON 或 OFF/OBJ 网格）")
    parser.add_argument('--out', type=Path, default=None, help="输出目录（覆盖 output.out_dir）")
    parser.add_argument('--jobs', type=int, default=1, help="ε 扫描的并行进程数")
    return parser


class GLVortexApp:
    """命令行应用主类"""

    def __init__(self, args: argparse.Namespace):
        self.logger = logger
        self.args = args
        self.manager: Optional[ExperimentManager] = None
        self.experiment: Optional[ExperimentConfig] = None

    def initialize(self) -> bool:
        """加载配置并注册子命令

        Returns:
            bool: 初始化是否成功
        """
        try:
            self.experiment = load_source(self.args.config)
            self.manager = ExperimentManager()
            return True
        except GLVortexError as e:
            self.report_error(e)
            return False

    def report_error(self, error: GLVortexError):
        self.logger.error(f"[{error.module}] {error.message}")
        get_output_manager().output_error(error.to_dict())

    def run(self) -> int:
        """执行子命令，返回退出码"""
        try:
            self.manager.run(self.args.command, self.experiment, out_dir=self.args.out, jobs=self.args.jobs)
            return 0
        except GLVortexError as e:
            self.report_error(e)
            return 1
        except KeyboardInterrupt:
            self.logger.info("接收到中断信号，正在退出...")
            return 130
        except Exception as e:
            self.logger.error(f"运行过程中出错: {e}")
            get_output_manager().output_error({'error': type(e).__name__, 'module': 'glvortex',
                                               'message': str(e), 'diagnostic': {}})
            return 1


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)
    app = GLVortexApp(args)
    if not app.initialize():
        logger.error("应用初始化失败")
        return 2
    return app.run()


if __name__ == "__main__":
    sys.exit(main())
