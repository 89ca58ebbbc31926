"""
日志配置模块
"""

import logging
import os
from datetime import datetime
from typing import Optional

import config

LOG_ENV_VAR = "GLVORTEX_LOG"


def setup_logger(name: str = "glvortex", level: Optional[str] = None) -> logging.Logger:
    """设置日志记录器

    Args:
        name: 日志记录器名称
        level: 日志级别，缺省时读取环境变量 GLVORTEX_LOG（IS_DEBUG 为真时默认 DEBUG，否则 INFO）

    Returns:
        配置好的日志记录器
    """
    logger = logging.getLogger(name)

    # 避免重复添加处理器
    if logger.handlers:
        return logger

    level = level or os.environ.get(LOG_ENV_VAR, "DEBUG" if config.IS_DEBUG else "INFO")
    log_level = getattr(logging, level.upper(), logging.INFO)
    logger.setLevel(log_level)
    logger.propagate = False

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # 日志写到 stderr，stdout 留给结果输出
    console_handler = logging.StreamHandler()
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if config.OUTPUT_CONFIG.get('log_to_file', False):
        log_dir = config.OUTPUT_CONFIG.get('log_dir', 'logs')
        os.makedirs(log_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_file = os.path.join(log_dir, f"glvortex_{timestamp}.log")
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger
