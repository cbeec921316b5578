from .tuples import NonNegTuple, TriangleTriplet
from .verdict import (
    AuxiliaryCheck,
    ClassificationReport,
    ClassVerdict,
    Membership,
    PropertyKind,
    SamplerConfig,
    Tolerances,
    Verdict,
    VerdictStatus,
)
from .aggregator import AggregatorKind, AggregatorSpec
from .space import AggregationMode, AxiomClass, FiniteSpace, SpaceFamily, SpacePayload
from .topology import InclusionReport, NeighborhoodMap, TopologyOrder
from .probe import (
    ConvergenceMode,
    ConvergenceVerdict,
    ProbeSequence,
    Ray,
    SequenceSpace,
    SequenceVariant,
    StructuredImage,
)
from .report import Report

__all__ = [
    "NonNegTuple",
    "TriangleTriplet",
    "AuxiliaryCheck",
    "ClassificationReport",
    "ClassVerdict",
    "Membership",
    "PropertyKind",
    "SamplerConfig",
    "Tolerances",
    "Verdict",
    "VerdictStatus",
    "AggregatorKind",
    "AggregatorSpec",
    "AggregationMode",
    "AxiomClass",
    "FiniteSpace",
    "SpaceFamily",
    "SpacePayload",
    "InclusionReport",
    "NeighborhoodMap",
    "TopologyOrder",
    "ConvergenceMode",
    "ConvergenceVerdict",
    "ProbeSequence",
    "Ray",
    "SequenceSpace",
    "SequenceVariant",
    "StructuredImage",
    "Report",
]
