import enum
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class AxiomClass(str, enum.Enum):
    QUASI_PSEUDOMETRIC = "quasi_pseudometric"
    QUASI_METRIC = "quasi_metric"
    PSEUDOMETRIC = "pseudometric"
    METRIC = "metric"

    @property
    def symmetric(self) -> bool:
        return self in (AxiomClass.PSEUDOMETRIC, AxiomClass.METRIC)

    @property
    def separated(self) -> bool:
        return self in (AxiomClass.QUASI_METRIC, AxiomClass.METRIC)


class AggregationMode(str, enum.Enum):
    PRODUCTS = "products"
    SETS = "sets"


class FiniteSpace(BaseModel):
    """A validated finite quasi-pseudometric space.

    Build instances through ``services.spaces.validate_space``; the model only
    re-checks the shape.
    """

    model_config = ConfigDict(frozen=True)

    points: Tuple[Any, ...]
    matrix: Tuple[Tuple[float, ...], ...]
    axiom_class: AxiomClass

    @model_validator(mode="after")
    def _square(self) -> "FiniteSpace":
        n = len(self.points)
        if n == 0:
            raise ValueError("a space needs at least one point")
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise ValueError("matrix must be square and match the point list")
        return self

    @property
    def size(self) -> int:
        return len(self.points)

    def distances(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def index(self, point: Any) -> int:
        from src.core.errors import UnknownPointError

        for i, label in enumerate(self.points):
            if label == point:
                return i
        raise UnknownPointError(f"{point!r} is not a point of this space")

    def distance(self, x: Any, y: Any) -> float:
        return self.matrix[self.index(x)][self.index(y)]

    def to_payload(self) -> Dict[str, Any]:
        return {"points": [_jsonable(p) for p in self.points], "matrix": [list(r) for r in self.matrix]}


class SpaceFamily(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: AggregationMode
    members: Tuple[FiniteSpace, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _shared_points(self) -> "SpaceFamily":
        if self.mode == AggregationMode.SETS:
            first = self.members[0].points
            if any(member.points != first for member in self.members[1:]):
                raise ValueError("set-mode members must share an identical point list")
        return self

    @property
    def arity(self) -> int:
        return len(self.members)

    @property
    def all_metric(self) -> bool:
        return all(member.axiom_class == AxiomClass.METRIC for member in self.members)


class SpacePayload(BaseModel):
    """Matrix file format: {"points": [...], "matrix": [[...], ...]}."""

    points: List[Any]
    matrix: List[List[float]]


def _jsonable(label: Any) -> Any:
    if isinstance(label, tuple):
        return [_jsonable(item) for item in label]
    return label
