from datetime import datetime, timezone
from typing import Any, Dict

import numpy as np
from fastapi import APIRouter, status

from src.core import get_logger, settings
from src.services.aggregators import evaluate, parse_spec

router = APIRouter()
logger = get_logger(__name__)


@router.get("/health", status_code=status.HTTP_200_OK)
async def health_check() -> Dict[str, Any]:
    """Basic health check endpoint."""
    return {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _numerics_ready() -> bool:
    try:
        return evaluate(parse_spec("max"), np.array([1.0, 2.0])) == 2.0
    except Exception:
        logger.exception("numerics check failed")
        return False


@router.get("/health/ready", status_code=status.HTTP_200_OK)
async def readiness_check() -> Dict[str, Any]:
    """
    Readiness check endpoint.
    Evaluates a trivial aggregation and validates the sampler settings.
    """
    checks = {
        "numerics": _numerics_ready(),
        "settings": settings.sampler_config().budget >= 1,
    }

    all_ready = all(checks.values())
    if not all_ready:
        logger.warning("Readiness check failed", checks=checks)

    return {
        "status": "ready" if all_ready else "not_ready",
        "checks": checks,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


@router.get("/health/live", status_code=status.HTTP_200_OK)
async def liveness_check() -> Dict[str, str]:
    """
    Liveness check endpoint.
    Simple check to verify the application is running.
    """
    return {"status": "alive"}
