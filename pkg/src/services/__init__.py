from .aggregators import evaluate, evaluate_batch, parse_spec, resolve_arity
from .classifier import classify
from .spaces import product_aggregate, set_aggregate, validate_space
from .alexandrov import check_product_inclusion, check_sup_inclusion
from .probe import check_usc_at_zero, converges, strongness_probe

__all__ = [
    "evaluate",
    "evaluate_batch",
    "parse_spec",
    "resolve_arity",
    "classify",
    "product_aggregate",
    "set_aggregate",
    "validate_space",
    "check_product_inclusion",
    "check_sup_inclusion",
    "check_usc_at_zero",
    "converges",
    "strongness_probe",
]
