from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field


class Report(BaseModel):
    """Uniform envelope printed by the CLI (``--json``) and returned by the API."""

    model_config = ConfigDict(frozen=True)

    command: str
    inputs: Dict[str, Any]
    results: Dict[str, Any]
    citations: List[str] = Field(default_factory=list)
    ok: bool = True
    seed: int
    version: str
