"""
snnbench - Logging Configuration
Structured logging setup for the package.
"""

import logging
import sys
from typing import Optional

from .config import config


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Setup logging configuration."""
    level_name = (level or config.logging.level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name),
        format=config.logging.format,
        stream=sys.stdout,
    )
    # Create logger for the package
    logger = logging.getLogger("snnbench")
    logger.setLevel(getattr(logging, level_name))
    return logger


# Package logger; handlers are attached by setup_logging()
logger = logging.getLogger("snnbench")
