"""
snnbench - Results Ledger Database
Handles database connection, initialization, and base configuration.
"""

import logging
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import NullPool

from ..config import config

logger = logging.getLogger("snnbench")

# SQLAlchemy Base for all models
Base = declarative_base()

# Global engine and session
_engine = None
_SessionLocal = None


def init(database: Optional[str] = None, echo: Optional[bool] = None, **kwargs):
    """
    Initialize the ledger connection and create all tables.

    Args:
        database: Connection string, default ``config.database.url``
        echo: Whether to log SQL statements, default ``config.database.echo``
        **kwargs: Additional arguments to pass to create_engine

    Examples:
        >>> import snnbench
        >>> snnbench.init(database="sqlite:///snnbench.db")
    """
    global _engine, _SessionLocal

    database = database or config.database.url
    echo = config.database.echo if echo is None else echo
    _engine = create_engine(
        database,
        echo=echo,
        poolclass=NullPool if database.startswith("sqlite") else None,
        **kwargs,
    )
    _SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=_engine)

    # Import models to register them with Base
    from . import models  # noqa: F401

    Base.metadata.create_all(bind=_engine)

    logger.info(f"✓ Ledger initialized: {database}")
    logger.info(f"✓ Created {len(Base.metadata.tables)} tables")


def is_initialized() -> bool:
    return _SessionLocal is not None


def get_engine():
    """Get the current database engine."""
    if _engine is None:
        raise RuntimeError("Ledger not initialized. Call init() first.")
    return _engine


def get_session():
    """Get a new database session."""
    if _SessionLocal is None:
        raise RuntimeError("Ledger not initialized. Call init() first.")
    return _SessionLocal()


def close():
    """Close database connections."""
    global _engine, _SessionLocal
    if _engine:
        _engine.dispose()
        _engine = None
        _SessionLocal = None
        logger.info("✓ Ledger connections closed")
