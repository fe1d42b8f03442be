import logging
import os
import sys
from pathlib import Path


def default_loglevel() -> int:
    level = logging.getLevelName(os.environ.get("DNTS_LOG_LEVEL", "INFO").upper())
    return level if isinstance(level, int) else logging.INFO


def create_logger(
    name: str = "dnts",
    loglevel: int | None = None,
    logfile: str | Path | None = None,
    streamHandle: bool = True,
) -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(default_loglevel() if loglevel is None else loglevel)
    formatter = logging.Formatter(
        fmt="%(asctime)s - %(message)s",
        datefmt="%d/%m/%Y %H:%M:%S",
    )
    handlers: list[logging.Handler] = []
    if logfile is not None:
        handlers.append(logging.FileHandler(logfile, mode="a"))
    if streamHandle:
        handlers.append(logging.StreamHandler(stream=sys.stdout))

    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger
