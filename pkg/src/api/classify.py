from typing import Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from src.core import get_logger
from src.models import Report
from src.services import commands

router = APIRouter()
logger = get_logger(__name__)


class ClassifyRequest(BaseModel):
    fn: str = Field(..., min_length=1, examples=["max", "wsum(1,2)", "proj(2)"])
    arity: Optional[int] = Field(None, ge=1)
    samples: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None
    scale: Optional[float] = Field(None, gt=0)


@router.post("/classify", response_model=Report)
def classify(request: ClassifyRequest) -> Report:
    """Run every property checker on an aggregation function and derive its classes."""
    logger.info("classify requested", fn=request.fn, arity=request.arity)
    return commands.run_classify(
        request.fn,
        arity=request.arity,
        samples=request.samples,
        seed=request.seed,
        scale=request.scale,
    )
