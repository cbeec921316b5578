import enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SequenceVariant(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    UPPER = "upper"  # d(x, y) = max(y - x, 0)
    LOWER = "lower"  # d(x, y) = max(x - y, 0)


class SequenceSpace(BaseModel):
    """Truncated null sequence {0} u {1/k : 1 <= k <= K} on the real line."""

    model_config = ConfigDict(frozen=True)

    K: int = Field(default=1000, ge=10)
    variant: SequenceVariant = SequenceVariant.EUCLIDEAN

    @property
    def points(self) -> Tuple[float, ...]:
        return (0.0,) + tuple(1.0 / k for k in range(1, self.K + 1))

    def distance(self, x: float, y: float) -> float:
        if self.variant == SequenceVariant.UPPER:
            return max(y - x, 0.0)
        if self.variant == SequenceVariant.LOWER:
            return max(x - y, 0.0)
        return abs(x - y)


class ConvergenceMode(str, enum.Enum):
    PRODUCT_TOPOLOGY = "product_topology"
    SUP_TOPOLOGY = "sup_topology"
    AGGREGATED = "aggregated"


class ConvergenceVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: ConvergenceMode
    converges: bool
    epsilon_witness: Optional[Tuple[float, int]] = None
    tau: float
    tail_fraction: float
    tail_decay: float

    @model_validator(mode="after")
    def _witness(self) -> "ConvergenceVerdict":
        if not self.converges and self.epsilon_witness is None:
            raise ValueError("a non-convergent verdict needs an (epsilon, index) witness")
        return self


class Ray(BaseModel):
    """Curve t -> base + t * direction, sampled on t = 2^-j."""

    model_config = ConfigDict(frozen=True)

    base: Tuple[float, ...]
    direction: Tuple[float, ...]
    name: Optional[str] = None

    @model_validator(mode="after")
    def _shape(self) -> "Ray":
        if len(self.base) != len(self.direction) or not self.base:
            raise ValueError("ray base and direction need one common arity")
        if any(v < 0 for v in self.base):
            raise ValueError("ray base must be nonnegative")
        if any(b + d < 0 for b, d in zip(self.base, self.direction)):
            raise ValueError("ray leaves the nonnegative cone on (0, 1]")
        return self


class StructuredImage(BaseModel):
    """An image Im(d(x, .)) known through isolated points and sampled rays."""

    model_config = ConfigDict(frozen=True)

    isolated: Tuple[Tuple[float, ...], ...] = ()
    rays: Tuple[Ray, ...] = ()

    @field_validator("isolated")
    @classmethod
    def _nonnegative(cls, isolated):
        for point in isolated:
            if any(v < 0 for v in point):
                raise ValueError("image points must be nonnegative")
        return isolated

    @model_validator(mode="after")
    def _common_arity(self) -> "StructuredImage":
        arities = {len(p) for p in self.isolated} | {len(r.base) for r in self.rays}
        if len(arities) > 1:
            raise ValueError("image points and rays must share one arity")
        return self

    @property
    def arity(self) -> Optional[int]:
        if self.isolated:
            return len(self.isolated[0])
        if self.rays:
            return len(self.rays[0].base)
        return None


class ProbeSequence(BaseModel):
    """A sequence in a product of sequence spaces together with its candidate limit."""

    model_config = ConfigDict(frozen=True)

    name: str
    terms: List[Tuple[float, ...]]
    limit: Tuple[float, ...]
