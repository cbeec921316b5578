"""Exception hierarchy shared by the services, the CLI and the HTTP surface."""

from typing import Any, Dict, List, Optional, Sequence


class MetriforgeError(Exception):
    """Base class for every error raised on purpose by metriforge."""

    code = "metriforge_error"

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "detail": str(self)}


class DimensionError(MetriforgeError):
    code = "dimension_error"


class DomainError(MetriforgeError):
    code = "domain_error"


class ParseError(MetriforgeError):
    code = "parse_error"

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position

    def to_dict(self) -> Dict[str, Any]:
        return {**super().to_dict(), "position": self.position}


class CapExceededError(MetriforgeError):
    code = "cap_exceeded"

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what} has {size} elements, above the configured cap of {cap}")
        self.size = size
        self.cap = cap


class EnumerationError(CapExceededError):
    code = "enumeration_error"


class PreconditionError(MetriforgeError):
    code = "precondition_error"


class ContractError(MetriforgeError):
    code = "contract_error"


class UnknownPointError(MetriforgeError):
    code = "unknown_point"


class AxiomViolationError(MetriforgeError):
    """A distance matrix fails one or more quasi-pseudometric axioms."""

    code = "axiom_violation"

    def __init__(self, violations: Sequence[Dict[str, Any]], message: Optional[str] = None):
        self.violations: List[Dict[str, Any]] = list(violations)
        summary = "; ".join(
            f"{v['axiom']} at {v['witness']}" for v in self.violations
        )
        super().__init__(message or f"axiom violations: {summary}")

    def to_dict(self) -> Dict[str, Any]:
        return {**super().to_dict(), "violations": self.violations}


class AggregationCounterexample(AxiomViolationError):
    """An aggregated space broke an axiom, so F does not aggregate this family."""

    code = "aggregation_counterexample"

    def __init__(self, violations: Sequence[Dict[str, Any]], mode: str):
        self.mode = mode
        super().__init__(
            violations,
            message=f"{mode} aggregation is not a quasi-pseudometric: "
            + "; ".join(f"{v['axiom']} at {v['witness']}" for v in violations),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {**super().to_dict(), "mode": self.mode}
