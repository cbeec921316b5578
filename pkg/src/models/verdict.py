import enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class VerdictStatus(str, enum.Enum):
    CONSISTENT = "consistent_after_budget"
    FALSIFIED = "falsified"


class PropertyKind(str, enum.Enum):
    VANISHES_AT_ZERO = "vanishes_at_zero"
    ZERO_PREIMAGE_TRIVIAL = "zero_preimage_trivial"
    MONOTONE = "monotone"
    SUBADDITIVE = "subadditive"
    TRIPLET_PRESERVING = "triplet_preserving"
    ASYMMETRIC_TRIPLET = "asymmetric_triplet"
    CONTINUOUS_AT_ZERO = "continuous_at_zero"


class AuxiliaryCheck(str, enum.Enum):
    POSITIVE_CONE_TRIPLET = "positive_cone_triplet"
    POSITIVE_RAY_CONTINUITY = "positive_ray_continuity"
    OFFSET_RAY_COLLAPSE = "offset_ray_collapse"


class Membership(str, enum.Enum):
    CONSISTENT_WITH = "consistent_with"
    EXCLUDED = "excluded"
    UNDETERMINED = "undetermined"


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=42, ge=-(2**63), lt=2**64)
    budget: int = Field(default=100_000, ge=1)
    scale: float = Field(default=10.0, gt=0)
    grid_levels: Tuple[float, ...] = (0.0, 1e-9, 1e-3, 1.0, 2.0, 3.0, 1e3)
    corner_cap: int = Field(default=4096, ge=1)
    chunk_size: int = Field(default=4096, ge=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("grid_levels")
    @classmethod
    def _levels(cls, levels: Tuple[float, ...]) -> Tuple[float, ...]:
        if not levels or levels[0] != 0.0:
            raise ValueError("grid_levels must start with 0")
        if list(levels) != sorted(levels):
            raise ValueError("grid_levels must be sorted ascending")
        if len(set(levels)) != len(levels):
            raise ValueError("grid_levels must be distinct")
        return tuple(float(level) for level in levels)

    @property
    def seed_key(self) -> int:
        # SeedSequence needs a nonnegative entropy word
        return self.seed % (2**64)


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol_zero: float = Field(default=1e-9, ge=0)
    tol_cmp: float = Field(default=1e-9, ge=0)
    tol_cont: float = Field(default=1e-6, ge=0)
    continuity_depth: int = Field(default=40, ge=1)


class Verdict(BaseModel):
    """Outcome of one sampled-falsification run.

    Falsified verdicts are conclusive and carry the witness; consistent ones
    only say that the whole budget was spent without finding a violation.
    """

    model_config = ConfigDict(frozen=True)

    check: str
    status: VerdictStatus
    witness: Optional[Dict[str, Any]] = None
    samples_used: int = Field(ge=0)
    budget: int = Field(ge=1)
    corners_checked: int = Field(default=0, ge=0)
    seed: int
    note: Optional[str] = None

    @model_validator(mode="after")
    def _status_contract(self) -> "Verdict":
        if self.status == VerdictStatus.FALSIFIED and self.witness is None:
            raise ValueError("a falsified verdict needs a witness")
        if self.status == VerdictStatus.CONSISTENT and self.samples_used != self.budget:
            raise ValueError("a consistent verdict must have used the whole budget")
        return self

    @property
    def falsified(self) -> bool:
        return self.status == VerdictStatus.FALSIFIED

    @property
    def consistent(self) -> bool:
        return self.status == VerdictStatus.CONSISTENT


class ClassVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    membership: Membership
    requires: List[str] = Field(default_factory=list)
    excluded_by: List[str] = Field(default_factory=list)
    note: Optional[str] = None


class ClassificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    aggregator: str
    arity: int
    verdicts: Dict[PropertyKind, Verdict]
    auxiliary: Dict[AuxiliaryCheck, Verdict]
    classes: Dict[str, ClassVerdict]
    series_tail_bound: Optional[float] = None

    def membership(self, name: str) -> Membership:
        return self.classes[name].membership
