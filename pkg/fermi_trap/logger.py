import logging
from functools import lru_cache

from pydantic import BaseModel

from fermi_trap.constants import LOG_LEVEL

LOG_FORMAT = "%(asctime)s | %(message)s"
TIME_FORMAT = "%H:%M:%S"


class LoggerConfig(BaseModel):
    handlers: list
    format: str = LOG_FORMAT
    date_format: str = TIME_FORMAT
    level: int = logging.INFO


def _level_number(level: str) -> int:
    return logging.getLevelNamesMapping().get(level.upper(), logging.INFO)


@lru_cache
def get_logger_config(level: str = LOG_LEVEL) -> LoggerConfig:
    from rich.logging import RichHandler

    handler = RichHandler(rich_tracebacks=True, tracebacks_show_locals=False, show_time=False)
    return LoggerConfig(handlers=[handler], level=_level_number(level))


def setup_rich_logger(level: str = LOG_LEVEL):
    """Routes every `fermi_trap` logger (and scipy/numpy warnings) through one rich handler."""
    for logger in map(logging.getLogger, logging.root.manager.loggerDict):
        logger.handlers = []
        logger.propagate = True

    config = get_logger_config(level)
    logging.basicConfig(
        level=config.level,
        format=config.format,
        datefmt=config.date_format,
        handlers=config.handlers,
        force=True,
    )
    logging.captureWarnings(True)
