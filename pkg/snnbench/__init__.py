"""
snnbench - Main Package
Workbench for converting trained perceptrons into spiking networks and
benchmarking them on emulated neuromorphic platforms.
"""

from .core.database import close, get_session, init
from .core.loader import load
from .health import health_check

__version__ = "0.1.0"
__all__ = ["init", "load", "close", "get_session", "health_check"]
