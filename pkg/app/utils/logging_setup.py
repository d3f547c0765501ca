"""
Logging configuration
Colored records on stderr (stdout carries machine-readable output only) and an optional log file
"""
import logging
import sys
from pathlib import Path
from typing import Optional

import colorlog

from app.config.settings import get_settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: Optional[str] = None, verbose: bool = False, log_file: Optional[str] = None) -> logging.Logger:
    """
    Install handlers on the root logger, replacing any previous ones.

    Args:
        level: level name, settings.log_level by default
        verbose: force DEBUG
        log_file: file name under settings.logs_directory; written when given or when log_to_file is set
    """
    cfg = get_settings()
    level = "DEBUG" if verbose else (level or cfg.log_level).upper()

    # UTF-8 for the emoji prefixes on Windows consoles
    if sys.platform == "win32":
        sys.stderr.reconfigure(encoding="utf-8")

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    console = colorlog.StreamHandler(sys.stderr)
    console.setFormatter(colorlog.ColoredFormatter(
        "%(log_color)s" + LOG_FORMAT,
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
    ))
    root.addHandler(console)

    if log_file or cfg.log_to_file:
        logs = Path(cfg.logs_directory)
        logs.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(logs / (log_file or "colander.log"), mode="a", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(file_handler)

    root.setLevel(level)
    return root
