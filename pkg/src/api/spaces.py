from typing import List

from fastapi import APIRouter
from pydantic import BaseModel, Field

from src.core import get_logger
from src.models import AggregationMode, Report, SpacePayload
from src.services import commands, spaces

router = APIRouter()
logger = get_logger(__name__)


class AggregationRequest(BaseModel):
    fn: str = Field(..., min_length=1)
    mode: AggregationMode = AggregationMode.PRODUCTS
    members: List[SpacePayload] = Field(..., min_length=1)


@router.post("/axioms", response_model=Report)
def axioms(request: AggregationRequest) -> Report:
    """Aggregate the member spaces and report the resulting axiom class."""
    members = [spaces.space_from_payload(payload) for payload in request.members]
    return commands.run_axioms(request.fn, request.mode, members)


@router.post("/topology", response_model=Report)
def topology(request: AggregationRequest) -> Report:
    """Compare the product or supremum topology with the aggregated one."""
    members = [spaces.space_from_payload(payload) for payload in request.members]
    return commands.run_topology(request.fn, request.mode, members)
