"""Evaluable aggregation functions and the textual function syntax.

Grammar (case-insensitive, whitespace between tokens ignored)::

    max | min | proj(k) | wsum(w1,...,wn) | pnorm(p) | series(K)
        | dobos | jump | indicator

Names outside the grammar are looked up in the custom registry.
"""

import re
from typing import Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from src.core import get_logger
from src.core.errors import DimensionError, DomainError, ParseError, PreconditionError
from src.models import AggregatorKind, AggregatorSpec, NonNegTuple
from src.models.aggregator import BatchFunction

logger = get_logger(__name__)

TupleLike = Union[NonNegTuple, Sequence[float], np.ndarray]


class CustomAggregator(NamedTuple):
    function: BatchFunction
    arity: Optional[int]
    description: str


_CUSTOM: Dict[str, CustomAggregator] = {}


def register_custom(
    name: str, function: BatchFunction, arity: Optional[int] = None, description: str = ""
) -> None:
    """Register a named batch function usable from ``parse_spec``."""
    key = name.strip().lower()
    if not _TOKEN.fullmatch(key) or key in _FIXED_NAMES:
        raise PreconditionError(f"{name!r} cannot be used as a custom aggregator name")
    _CUSTOM[key] = CustomAggregator(function, arity, description)


def custom_names() -> List[str]:
    return sorted(_CUSTOM)


def custom_spec(name: str) -> AggregatorSpec:
    entry = _CUSTOM[name]
    return AggregatorSpec(
        kind=AggregatorKind.CUSTOM, arity=entry.arity, expression=name, function=entry.function
    )


def evaluate_batch(spec: AggregatorSpec, A: np.ndarray) -> np.ndarray:
    """Evaluate ``spec`` on every row of an (m, n) array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionError("batch evaluation needs an (m, n) array")
    n = A.shape[1]
    if not spec.accepts(n):
        raise DimensionError(f"{spec.label} cannot be evaluated at arity {n}")
    if np.isnan(A).any() or (A < 0).any():
        raise DomainError(f"{spec.label} is defined on [0, inf)^{n}, got a negative or NaN entry")

    kind = spec.kind
    if kind == AggregatorKind.MAX:
        return A.max(axis=1)
    if kind == AggregatorKind.MIN:
        return A.min(axis=1)
    if kind == AggregatorKind.WEIGHTED_SUM:
        return A @ np.asarray(spec.weights, dtype=float)
    if kind == AggregatorKind.PNORM:
        return _pnorm(A, spec.p)
    if kind == AggregatorKind.SERIES:
        weights = 2.0 ** -np.arange(1, n + 1)
        return (A / (1.0 + A)) @ weights
    if kind == AggregatorKind.PROJECTION:
        return A[:, spec.coordinate - 1].copy()
    if kind == AggregatorKind.DOBOS:
        a = A[:, 0]
        return np.where(a <= 2.0, a, 1.0 + 1.0 / np.maximum(a - 1.0, 1.0))
    if kind == AggregatorKind.JUMP:
        return (A[:, 0] != 0.0).astype(float)
    if kind == AggregatorKind.INDICATOR:
        return ((A[:, 0] != 0.0) & (A[:, 1] != 0.0)).astype(float)

    values = np.asarray(spec.function(A), dtype=float).reshape(A.shape[0])
    if (values < 0).any():
        raise DomainError(f"custom aggregator {spec.label} returned a negative value")
    return values


def _pnorm(A: np.ndarray, p: float) -> np.ndarray:
    # scale by the row max so large p cannot overflow
    peak = A.max(axis=1)
    safe = np.where(peak > 0, peak, 1.0)
    return peak * ((A / safe[:, None]) ** p).sum(axis=1) ** (1.0 / p)


def as_row(a: TupleLike) -> np.ndarray:
    if isinstance(a, NonNegTuple):
        return a.as_array()
    row = np.asarray(a, dtype=float)
    if row.ndim != 1 or row.size == 0:
        raise DimensionError("a tuple must be a nonempty flat sequence")
    return row


def evaluate(spec: AggregatorSpec, a: TupleLike) -> float:
    """F(a) for a single tuple."""
    return float(evaluate_batch(spec, as_row(a)[None, :])[0])


def series_tail_bound(K: int) -> float:
    """Upper bound 2^-K on the tail a Series(K) truncation discards."""
    if K < 1:
        raise PreconditionError("series truncation K must be >= 1")
    return 2.0**-K


_TOKEN = re.compile(r"[a-z_][a-z0-9_\-]*")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?")
_FIXED_NAMES = {kind.value for kind in AggregatorKind if kind != AggregatorKind.CUSTOM}


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.lowered = text.lower()
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def fail(self, message: str, position: Optional[int] = None) -> ParseError:
        return ParseError(message, self.text, self.pos if position is None else position)

    def expect(self, char: str) -> None:
        self.skip()
        if self.lowered[self.pos : self.pos + 1] != char:
            raise self.fail(f"expected {char!r}")
        self.pos += 1

    def match(self, pattern: re.Pattern) -> Optional[str]:
        self.skip()
        found = pattern.match(self.lowered, self.pos)
        if not found:
            return None
        self.pos = found.end()
        return found.group(0)

    def numbers(self) -> List[tuple]:
        """Parenthesized, comma separated numbers with their positions."""
        self.expect("(")
        values = []
        while True:
            self.skip()
            start = self.pos
            token = self.match(_NUMBER)
            if token is None:
                raise self.fail("expected a number")
            values.append((float(token), start, token))
            self.skip()
            if self.lowered[self.pos : self.pos + 1] == ",":
                self.pos += 1
                continue
            self.expect(")")
            return values


def _single(values: List[tuple], cursor: _Cursor, name: str) -> tuple:
    if len(values) != 1:
        raise cursor.fail(f"{name} takes exactly one parameter", values[1][1])
    return values[0]


def _integer(entry: tuple, cursor: _Cursor, what: str) -> int:
    value, position, token = entry
    if not value.is_integer() or not re.fullmatch(r"[+-]?\d+", token):
        raise cursor.fail(f"{what} must be an integer", position)
    return int(value)


def parse_spec(text: str) -> AggregatorSpec:
    """Parse the function syntax into an :class:`AggregatorSpec`."""
    if text is None or not text.strip():
        raise ParseError("empty function specification", text or "", 0)
    cursor = _Cursor(text)
    cursor.skip()
    start = cursor.pos
    name = cursor.match(_TOKEN)
    if name is None:
        raise cursor.fail("expected a function name")

    if name in ("max", "min", "dobos", "jump", "indicator"):
        spec = AggregatorSpec(kind=AggregatorKind(name))
    elif name == "wsum":
        weights = cursor.numbers()
        for value, position, _ in weights:
            if value < 0:
                raise cursor.fail("weights must be nonnegative", position)
        spec = AggregatorSpec(
            kind=AggregatorKind.WEIGHTED_SUM,
            weights=tuple(value for value, _, _ in weights),
            arity=len(weights),
        )
    elif name == "pnorm":
        value, position, _ = _single(cursor.numbers(), cursor, "pnorm")
        if not value >= 1:
            raise cursor.fail("pnorm needs p >= 1", position)
        spec = AggregatorSpec(kind=AggregatorKind.PNORM, p=value)
    elif name == "series":
        entry = _single(cursor.numbers(), cursor, "series")
        K = _integer(entry, cursor, "series truncation K")
        if K < 1:
            raise cursor.fail("series needs K >= 1", entry[1])
        spec = AggregatorSpec(kind=AggregatorKind.SERIES, truncation=K)
    elif name == "proj":
        entry = _single(cursor.numbers(), cursor, "proj")
        k = _integer(entry, cursor, "projection coordinate")
        if k < 1:
            raise cursor.fail("projection coordinate must be >= 1", entry[1])
        spec = AggregatorSpec(kind=AggregatorKind.PROJECTION, coordinate=k)
    elif name in _CUSTOM:
        spec = custom_spec(name)
    else:
        raise cursor.fail(f"unknown function {name!r}", start)

    if not cursor.at_end():
        raise cursor.fail("unexpected trailing input")
    logger.debug("parsed function", text=text, label=spec.label)
    return spec


def resolve_arity(spec: AggregatorSpec, arity: Optional[int] = None) -> AggregatorSpec:
    """Bind ``spec`` to ``arity``, or to the arity its parameters imply."""
    if arity is None:
        arity = spec.fixed_arity()
    if arity is None:
        raise PreconditionError(f"{spec.label} is variadic, an arity is required")
    return spec.bind(arity)


def describe(spec: AggregatorSpec) -> Dict[str, object]:
    return {"label": spec.label, "kind": spec.kind.value, "arity": spec.arity}


register_custom(
    "zero", lambda A: np.zeros(A.shape[0]), description="constant zero, collapses every space"
)
register_custom("square", lambda A: A[:, 0] ** 2, arity=1, description="a_1 squared, not subadditive")
register_custom("shift", lambda A: A[:, 0] + 1.0, arity=1, description="a_1 + 1, does not vanish at 0")
