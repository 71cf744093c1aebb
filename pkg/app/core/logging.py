# app/core/logging.py

import logging
import sys

from app.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
HANDLER_NAME = "femtonet"


def configure_logging(level: str | None = None, quiet: bool = False) -> None:
    """
    One named stderr handler on the root logger; calling again replaces it.
    --quiet keeps warnings and errors only.
    """
    resolved = "WARNING" if quiet else (level or settings.LOG_LEVEL)
    root = logging.getLogger()
    reset_logging()

    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(HANDLER_NAME)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt="%H:%M:%S"))
    root.addHandler(handler)
    root.setLevel(resolved.upper())


def reset_logging() -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == HANDLER_NAME:
            root.removeHandler(handler)
