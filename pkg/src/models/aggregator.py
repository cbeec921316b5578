import enum
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Batch callable: (m, n) array of nonnegative rows -> (m,) array of values
BatchFunction = Callable[[np.ndarray], np.ndarray]


class AggregatorKind(str, enum.Enum):
    MAX = "max"
    MIN = "min"
    WEIGHTED_SUM = "wsum"
    PNORM = "pnorm"
    SERIES = "series"
    PROJECTION = "proj"
    DOBOS = "dobos"
    JUMP = "jump"
    INDICATOR = "indicator"
    CUSTOM = "custom"


VARIADIC_KINDS = frozenset(
    {AggregatorKind.MAX, AggregatorKind.MIN, AggregatorKind.PNORM, AggregatorKind.SERIES}
)


class AggregatorSpec(BaseModel):
    """A named, parameterized aggregation function F: [0, inf)^n -> [0, inf).

    ``arity`` is None for variadic kinds until :meth:`bind` fixes it.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: AggregatorKind
    arity: Optional[int] = Field(default=None, ge=1)
    weights: Optional[Tuple[float, ...]] = None
    p: Optional[float] = None
    truncation: Optional[int] = None
    coordinate: Optional[int] = None
    expression: Optional[str] = None
    function: Optional[BatchFunction] = Field(default=None, exclude=True, repr=False)

    @model_validator(mode="after")
    def _parameters(self) -> "AggregatorSpec":
        kind = self.kind
        if kind == AggregatorKind.WEIGHTED_SUM:
            if not self.weights or any(w < 0 for w in self.weights):
                raise ValueError("weights must be a nonempty list of nonnegative numbers")
            if self.arity is not None and self.arity != len(self.weights):
                raise ValueError("weighted sum arity must equal the number of weights")
        if kind == AggregatorKind.PNORM and (self.p is None or self.p < 1):
            raise ValueError("pnorm needs p >= 1")
        if kind == AggregatorKind.SERIES:
            if self.truncation is None or self.truncation < 1:
                raise ValueError("series needs a truncation K >= 1")
            if self.arity is not None and self.arity > self.truncation:
                raise ValueError("series arity cannot exceed its truncation K")
        if kind == AggregatorKind.PROJECTION:
            if self.coordinate is None or self.coordinate < 1:
                raise ValueError("projection needs a coordinate k >= 1")
            if self.arity is not None and self.coordinate > self.arity:
                raise ValueError("projection coordinate must satisfy 1 <= k <= arity")
        if kind in (AggregatorKind.DOBOS, AggregatorKind.JUMP) and self.arity not in (None, 1):
            raise ValueError(f"{kind.value} has arity 1")
        if kind == AggregatorKind.INDICATOR and self.arity not in (None, 2):
            raise ValueError("indicator has arity 2")
        if kind == AggregatorKind.CUSTOM and (self.function is None or not self.expression):
            raise ValueError("custom aggregators need a name and a batch function")
        return self

    @property
    def variadic(self) -> bool:
        return self.kind in VARIADIC_KINDS

    @property
    def label(self) -> str:
        kind = self.kind
        if kind == AggregatorKind.WEIGHTED_SUM:
            return "wsum(" + ",".join(f"{w:g}" for w in self.weights) + ")"
        if kind == AggregatorKind.PNORM:
            return f"pnorm({self.p:g})"
        if kind == AggregatorKind.SERIES:
            return f"series({self.truncation})"
        if kind == AggregatorKind.PROJECTION:
            return f"proj({self.coordinate})"
        if kind == AggregatorKind.CUSTOM:
            return self.expression
        return kind.value

    def fixed_arity(self) -> Optional[int]:
        """Arity implied by the parameters alone."""
        if self.arity is not None:
            return self.arity
        if self.kind == AggregatorKind.WEIGHTED_SUM:
            return len(self.weights)
        if self.kind in (AggregatorKind.DOBOS, AggregatorKind.JUMP):
            return 1
        if self.kind == AggregatorKind.INDICATOR:
            return 2
        if self.kind == AggregatorKind.SERIES:
            return self.truncation
        return None

    def accepts(self, arity: int) -> bool:
        """Whether this aggregator can be evaluated on tuples of this arity."""
        if arity < 1:
            return False
        if self.arity is not None:
            return self.arity == arity
        if self.kind == AggregatorKind.SERIES:
            return arity <= self.truncation
        if self.kind == AggregatorKind.PROJECTION:
            return self.coordinate <= arity
        if self.variadic or self.kind == AggregatorKind.CUSTOM:
            return True
        return self.fixed_arity() == arity

    def bind(self, arity: int) -> "AggregatorSpec":
        """Return a copy with the arity fixed; raises DimensionError on conflict."""
        from src.core.errors import DimensionError

        if not self.accepts(arity):
            raise DimensionError(f"{self.label} cannot be evaluated at arity {arity}")
        return self.model_copy(update={"arity": arity})
