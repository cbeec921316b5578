from typing import Dict, List, Optional

from fastapi import APIRouter, HTTPException, status
from pydantic import BaseModel, Field

from src.core import get_logger
from src.models import Report
from src.services import commands, demos

router = APIRouter()
logger = get_logger(__name__)


class DemoRequest(BaseModel):
    seed: Optional[int] = None
    samples: Optional[int] = Field(None, ge=1)


@router.get("/demos")
async def list_demos() -> List[Dict[str, str]]:
    return commands.list_demos()


@router.post("/demos/{name}", response_model=Report)
def run_demo(name: str, request: Optional[DemoRequest] = None) -> Report:
    """Run a demo scenario; ``ok`` is false when an expectation was not met."""
    if name not in demos.DEMOS:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Demo {name} not found")
    request = request or DemoRequest()
    report = commands.run_demo(name, seed=request.seed, samples=request.samples)
    if not report.ok:
        logger.warning("demo expectations not met", demo=name)
    return report
