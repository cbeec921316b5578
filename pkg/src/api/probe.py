from typing import Any, Dict, Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from src.core import get_logger
from src.models import Report
from src.services import commands

router = APIRouter()
logger = get_logger(__name__)


class ProbeRequest(BaseModel):
    fn: str = Field(..., min_length=1)
    scenario: str = Field(..., examples=list(commands.PROBE_SCENARIOS))
    K: Optional[int] = Field(None, ge=10)
    arity: Optional[int] = Field(None, ge=1)
    image: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None


@router.post("/probe", response_model=Report)
def run_probe(request: ProbeRequest) -> Report:
    """Run a convergence or semicontinuity scenario."""
    return commands.run_probe(
        request.fn,
        request.scenario,
        K=request.K,
        arity=request.arity,
        image=request.image,
        seed=request.seed,
    )
