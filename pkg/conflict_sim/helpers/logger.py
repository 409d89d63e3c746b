# conflict-sim - traffic-conflict game simulation toolkit

import logging
import os
from typing import Optional

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class Logger:
    """
    Owns the `conflict_sim` logger tree.

    Level and format come from the LOGGER_LEVEL and LOGGER_FORMAT environment variables unless passed in. An unknown
    level name falls back to INFO. Records stop at the package logger, so applications embedding conflict-sim keep
    their own root configuration.

    Attributes:
        name (str): Name of the package logger.
        level (int): Numeric level applied to the package logger.
        fmt (str): Record format of the stream handler.
    """

    def __init__(self, name: str = "conflict_sim", level: Optional[str] = None, fmt: Optional[str] = None):
        """
        Initialize the package logger.

        Args:
            name (str): Name of the package logger.
            level (str, optional): Level name, e.g. "DEBUG".
            fmt (str, optional): Record format.
        """
        self.name = name
        self.fmt = fmt or os.environ.get("LOGGER_FORMAT", DEFAULT_FORMAT)
        requested = (level or os.environ.get("LOGGER_LEVEL", "INFO")).upper()
        self.level = logging.getLevelName(requested)
        unknown = not isinstance(self.level, int)
        if unknown:
            self.level = logging.INFO

        self.logger = logging.getLogger(self.name)
        self.logger.setLevel(self.level)
        self.logger.propagate = False
        # Pool workers import the package again; one handler per process
        if not any(getattr(h, "_conflict_sim", False) for h in self.logger.handlers):
            handler = logging.StreamHandler()
            handler._conflict_sim = True
            handler.setFormatter(logging.Formatter(self.fmt))
            self.logger.addHandler(handler)
        if unknown:
            self.logger.warning(f"unknown LOGGER_LEVEL {requested!r}, using INFO")

    def get_logger(self, suffix: Optional[str] = None) -> logging.Logger:
        """
        Return the package logger, or one of its children.

        Args:
            suffix (str, optional): Child name, e.g. "harness" for `conflict_sim.harness`.

        Returns:
            (logging.Logger): The requested logger.
        """
        return self.logger.getChild(suffix) if suffix else self.logger


LOGGER = Logger()
logger = LOGGER.get_logger()
