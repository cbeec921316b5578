import math
from typing import Iterable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class NonNegTuple(BaseModel):
    """A point of the cone [0, +inf)^n; the arity n stands for the index set."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]

    @field_validator("values")
    @classmethod
    def _nonnegative(cls, values: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(values) < 1:
            raise ValueError("a tuple needs arity >= 1")
        for i, value in enumerate(values):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"entry {i} is {value}, entries must be finite and >= 0")
        return tuple(float(value) for value in values)

    @property
    def arity(self) -> int:
        return len(self.values)

    @classmethod
    def of(cls, values: Iterable[float]) -> "NonNegTuple":
        return cls(values=tuple(float(v) for v in values))

    @classmethod
    def zero(cls, arity: int) -> "NonNegTuple":
        return cls(values=(0.0,) * arity)

    def is_zero(self) -> bool:
        return all(value == 0.0 for value in self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __add__(self, other: "NonNegTuple") -> "NonNegTuple":
        if other.arity != self.arity:
            from src.core.errors import DimensionError

            raise DimensionError(f"cannot add arity {self.arity} and arity {other.arity}")
        return NonNegTuple(values=tuple(a + b for a, b in zip(self.values, other.values)))

    def __le__(self, other: "NonNegTuple") -> bool:
        return all(a <= b for a, b in zip(self.values, other.values))

    def __str__(self) -> str:
        return "(" + ", ".join(f"{v:g}" for v in self.values) + ")"


class TriangleTriplet(BaseModel):
    """Tuples (a, b, c) with a <= b + c, b <= a + c and c <= a + b componentwise."""

    model_config = ConfigDict(frozen=True)

    a: NonNegTuple
    b: NonNegTuple
    c: NonNegTuple

    @model_validator(mode="after")
    def _is_triplet(self) -> "TriangleTriplet":
        if not (self.a.arity == self.b.arity == self.c.arity):
            raise ValueError("triplet tuples must share one arity")
        for x, y, z in zip(self.a.values, self.b.values, self.c.values):
            if x > y + z or y > x + z or z > x + y:
                raise ValueError("tuples do not form a triangle triplet")
        return self

    @property
    def arity(self) -> int:
        return self.a.arity
