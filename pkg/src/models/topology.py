import enum
from typing import Any, FrozenSet, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class TopologyOrder(str, enum.Enum):
    EQUAL = "equal"
    FIRST_COARSER_STRICT = "first_coarser_strict"
    SECOND_COARSER_STRICT = "second_coarser_strict"
    INCOMPARABLE = "incomparable"

    @property
    def first_in_second(self) -> bool:
        return self in (TopologyOrder.EQUAL, TopologyOrder.FIRST_COARSER_STRICT)

    @property
    def second_in_first(self) -> bool:
        return self in (TopologyOrder.EQUAL, TopologyOrder.SECOND_COARSER_STRICT)


class NeighborhoodMap(BaseModel):
    """Finite Alexandrov topology given by the minimal open set of every point.

    ``neighborhoods[i]`` holds indices into ``points``.
    """

    model_config = ConfigDict(frozen=True)

    points: Tuple[Any, ...]
    neighborhoods: Tuple[FrozenSet[int], ...]

    @model_validator(mode="after")
    def _alexandrov(self) -> "NeighborhoodMap":
        if len(self.points) != len(self.neighborhoods):
            raise ValueError("one neighborhood per point")
        member = self.membership()
        missing = np.flatnonzero(~np.diag(member))
        if missing.size:
            raise ValueError(f"point {self.points[missing[0]]!r} is missing from its own neighborhood")
        # y in U(x) and z in U(y) must give z in U(x)
        reach = member.astype(np.float32) @ member.astype(np.float32) > 0
        broken = np.argwhere(reach & ~member)
        if broken.size:
            x, z = broken[0]
            raise ValueError(
                f"U({self.points[x]!r}) is not transitive: it misses {self.points[z]!r}"
            )
        return self

    def membership(self) -> np.ndarray:
        """Boolean matrix M with M[x, y] true iff y is in U(x)."""
        n = len(self.points)
        member = np.zeros((n, n), dtype=bool)
        for x, U in enumerate(self.neighborhoods):
            if any(y < 0 or y >= n for y in U):
                raise ValueError(f"neighborhood of {self.points[x]!r} has an index out of range")
            member[x, sorted(U)] = True
        return member

    def labels(self, i: int) -> List[Any]:
        return [self.points[j] for j in sorted(self.neighborhoods[i])]


class InclusionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: TopologyOrder
    left: str
    right: str
    left_in_right: bool
    right_in_left: bool
    witness_point: Optional[Any] = None
    left_U: Optional[List[Any]] = None
    right_U: Optional[List[Any]] = None
    all_members_metric: bool = False
    note: Optional[str] = None
