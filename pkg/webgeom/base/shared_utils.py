"""Process-level settings: stderr logging and environment configuration."""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'


def setup_logging(name: str = "webgeom", level: int = logging.WARNING) -> logging.Logger:
    """Attach one stderr handler to the named logger.

    stdout carries the reports, so log records must never reach it. Calling
    this again for the same logger only changes the level.

    Args:
        name: Logger name, usually a top-level package
        level: Logging level

    Returns:
        The configured logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False

    stderr_handlers = [h for h in logger.handlers if getattr(h, "stream", None) is sys.stderr]
    if not stderr_handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        logger.addHandler(handler)
        stderr_handlers = [handler]
    for handler in stderr_handlers:
        handler.setLevel(level)

    return logger


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, str(default))
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def load_config() -> Dict[str, Any]:
    """Read the ``WEBGEOM_*`` settings, with ``.env`` filling in unset variables.

    Returns:
        Dictionary with ``config_path``, ``log_level``, ``data_dir`` and ``max_workers``

    Raises:
        ValueError: If the log level or worker count is not valid
    """
    load_dotenv()

    level_name = os.getenv("WEBGEOM_LOG_LEVEL", "WARNING").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        raise ValueError(f"WEBGEOM_LOG_LEVEL is not a logging level: {level_name}")

    return {
        "config_path": Path(os.getenv("WEBGEOM_CONFIG", "config/analysis_config.yaml")),
        "log_level": level,
        "data_dir": Path(os.getenv("WEBGEOM_DATA_DIR", "data")),
        "max_workers": _env_int("WEBGEOM_MAX_WORKERS", 4),
    }
