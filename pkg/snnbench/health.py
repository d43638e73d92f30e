"""
snnbench - Health Check Module
Health checks for monitoring and diagnostics.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from sqlalchemy import text

from .config import config
from .core.database import get_session, is_initialized
from .data.mnist import MNIST_FILES, find_idx_file, idx_count
from .hardware.profiles import list_presets, load_profile

logger = logging.getLogger("snnbench")


def health_check(data_dir: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Perform health checks on the workbench components.

    Returns:
        Dictionary with health status of each component
    """
    results = {
        "dataset": _check_dataset(Path(data_dir or config.data.dir)),
        "presets": _check_presets(),
        "ledger": _check_ledger(),
        "overall": "healthy",
    }

    # Determine overall health
    if any(
        result.get("status") == "unhealthy"
        for result in results.values()
        if isinstance(result, dict)
    ):
        results["overall"] = "unhealthy"

    return results


def _check_dataset(data_dir: Path) -> Dict[str, Any]:
    """Check that all four IDX files exist and carry valid headers."""
    try:
        counts = {}
        for name in MNIST_FILES:
            counts[name] = idx_count(find_idx_file(data_dir, name))
        return {
            "status": "healthy",
            "message": f"MNIST found in {data_dir}",
            "counts": counts,
        }
    except Exception as e:
        logger.error(f"Dataset health check failed: {e}")
        return {"status": "unhealthy", "message": str(e)}


def _check_presets() -> Dict[str, Any]:
    """Check that every hardware preset loads and validates."""
    try:
        names = list_presets()
        for name in names:
            load_profile(name)
        return {
            "status": "healthy",
            "message": f"{len(names)} presets valid",
            "presets": names,
        }
    except Exception as e:
        logger.error(f"Preset health check failed: {e}")
        return {"status": "unhealthy", "message": str(e)}


def _check_ledger() -> Dict[str, Any]:
    """Check ledger connectivity when it has been initialized."""
    if not is_initialized():
        return {"status": "skipped", "message": "Ledger not initialized"}
    try:
        session = get_session()
        try:
            session.execute(text("SELECT 1"))
        finally:
            session.close()
        return {"status": "healthy", "message": "Ledger connection successful"}
    except Exception as e:
        logger.error(f"Ledger health check failed: {e}")
        return {"status": "unhealthy", "message": str(e)}
