"""Finite quasi-pseudometric spaces, product and set aggregation, builtin spaces."""

import itertools
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from src.core import get_logger, settings
from src.core.errors import (
    AggregationCounterexample,
    AxiomViolationError,
    CapExceededError,
    DimensionError,
    PreconditionError,
)
from src.models import (
    AggregationMode,
    AggregatorSpec,
    AxiomClass,
    FiniteSpace,
    NonNegTuple,
    SpaceFamily,
    SpacePayload,
)
from src.services.aggregators import evaluate_batch

logger = get_logger(__name__)

FamilyLike = Union[SpaceFamily, Sequence[FiniteSpace]]

# rows evaluated per batch when building an aggregated matrix
_BLOCK_ENTRIES = 1 << 20


def _label(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_label(item) for item in value)
    return value


def printable(label: Any) -> Any:
    if isinstance(label, tuple):
        return [printable(item) for item in label]
    return label


def axiom_violations(points: Sequence[Any], D: np.ndarray, tol: float = 0.0) -> List[Dict[str, Any]]:
    """One entry per violated axiom, each with its lexicographically first witness."""
    violations: List[Dict[str, Any]] = []
    n = D.shape[0]

    negative = np.argwhere(D < 0)
    if negative.size:
        x, y = negative[0]
        violations.append(
            {"axiom": "nonnegativity", "witness": [printable(points[x]), printable(points[y])], "value": float(D[x, y])}
        )

    diagonal = np.flatnonzero(np.abs(np.diag(D)) > tol)
    if diagonal.size:
        x = diagonal[0]
        violations.append({"axiom": "zero_self_distance", "witness": [printable(points[x])], "value": float(D[x, x])})

    # d(x, z) <= d(x, y) + d(y, z), scanning x in order
    for x in range(n):
        through = D[x, :, None] + D
        broken = np.argwhere(D[x][None, :] > through + tol)
        if broken.size:
            y, z = broken[0]
            violations.append(
                {
                    "axiom": "triangle",
                    "witness": [printable(points[x]), printable(points[y]), printable(points[z])],
                    "value": float(D[x, z] - D[x, y] - D[y, z]),
                }
            )
            break
    return violations


def detect_axiom_class(D: np.ndarray, tol: float = 0.0) -> AxiomClass:
    """Strongest class of a matrix that already passed the axiom checks."""
    symmetric = bool(np.all(np.abs(D - D.T) <= tol))
    zero = (D == 0) & (D.T == 0)
    np.fill_diagonal(zero, False)
    separated = not zero.any()
    if symmetric:
        return AxiomClass.METRIC if separated else AxiomClass.PSEUDOMETRIC
    return AxiomClass.QUASI_METRIC if separated else AxiomClass.QUASI_PSEUDOMETRIC


def validate_space(points: Sequence[Any], matrix: Any, tol: float = 0.0) -> FiniteSpace:
    """Check the quasi-pseudometric axioms and detect the axiom class.

    ``tol`` is 0 for constructed spaces; aggregated spaces pass tol_cmp since
    evaluating F rounds. Separation always compares against exact zero.
    """
    points = tuple(_label(point) for point in points)
    D = np.asarray(matrix, dtype=float)
    if D.ndim != 2 or D.shape != (len(points), len(points)):
        raise DimensionError(f"matrix of shape {D.shape} does not match {len(points)} points")
    if len(points) == 0:
        raise DimensionError("a space needs at least one point")
    if len(set(points)) != len(points):
        raise PreconditionError("point labels must be distinct")
    if not np.isfinite(D).all():
        raise AxiomViolationError([{"axiom": "finiteness", "witness": "matrix has non-finite entries"}])

    violations = axiom_violations(points, D, tol)
    if violations:
        raise AxiomViolationError(violations)
    if tol > 0:
        D = D.copy()
        np.fill_diagonal(D, 0.0)
    axiom_class = detect_axiom_class(D, tol)
    return FiniteSpace(points=points, matrix=tuple(tuple(float(v) for v in row) for row in D), axiom_class=axiom_class)


def make_family(mode: AggregationMode, members: FamilyLike) -> SpaceFamily:
    if isinstance(members, SpaceFamily):
        if members.mode != mode:
            raise PreconditionError(f"expected a {mode.value} family, got {members.mode.value}")
        return members
    members = list(members)
    if not members:
        raise PreconditionError("aggregation needs at least one member space")
    return SpaceFamily(mode=mode, members=tuple(members))


def _aggregated(F: AggregatorSpec, mode: AggregationMode, points, stacked_rows, tol: float) -> FiniteSpace:
    try:
        return validate_space(points, stacked_rows, tol=tol)
    except AxiomViolationError as exc:
        logger.info("aggregation counterexample", aggregator=F.label, mode=mode.value, violations=exc.violations)
        raise AggregationCounterexample(exc.violations, mode.value) from exc


def product_aggregate(
    F: AggregatorSpec, fam: FamilyLike, tol: Optional[float] = None, cap: Optional[int] = None
) -> FiniteSpace:
    """F o d_Pi on the Cartesian product of the members."""
    fam = make_family(AggregationMode.PRODUCTS, fam)
    F = F.bind(fam.arity)
    tol = settings.tol_cmp if tol is None else tol
    cap = cap or settings.product_cap
    sizes = [member.size for member in fam.members]
    total = int(np.prod(sizes))
    if total > cap:
        raise CapExceededError("product space", total, cap)

    index = np.indices(sizes).reshape(len(sizes), -1).T
    points = tuple(
        tuple(member.points[i] for member, i in zip(fam.members, row)) for row in index
    )
    distances = [member.distances() for member in fam.members]
    D = np.empty((total, total))
    block = max(1, _BLOCK_ENTRIES // (total * fam.arity))
    for start in range(0, total, block):
        rows = index[start : start + block]
        stacked = np.stack(
            [d[rows[:, i][:, None], index[:, i][None, :]] for i, d in enumerate(distances)], axis=-1
        )
        D[start : start + block] = evaluate_batch(F, stacked.reshape(-1, fam.arity)).reshape(len(rows), total)
    logger.info("product aggregated", aggregator=F.label, points=total)
    return _aggregated(F, AggregationMode.PRODUCTS, points, D, tol)


def set_aggregate(F: AggregatorSpec, fam: FamilyLike, tol: Optional[float] = None) -> FiniteSpace:
    """F o d_Delta on the shared point list of the members."""
    fam = make_family(AggregationMode.SETS, fam)
    F = F.bind(fam.arity)
    tol = settings.tol_cmp if tol is None else tol
    points = fam.members[0].points
    stacked = np.stack([member.distances() for member in fam.members], axis=-1)
    size = len(points)
    D = evaluate_batch(F, stacked.reshape(-1, fam.arity)).reshape(size, size)
    logger.info("set aggregated", aggregator=F.label, points=size)
    return _aggregated(F, AggregationMode.SETS, points, D, tol)


def image_of_ddelta(fam: FamilyLike, x: Any) -> List[NonNegTuple]:
    """{(d_i(x, y))_i : y in points}, first occurrence order."""
    fam = make_family(AggregationMode.SETS, fam)
    row = fam.members[0].index(_label(x))
    seen: Dict[tuple, None] = {}
    for y in range(fam.members[0].size):
        seen.setdefault(tuple(member.matrix[row][y] for member in fam.members), None)
    return [NonNegTuple(values=values) for values in seen]


# Builtin spaces


def _labels(n: int) -> List[str]:
    if n == 2:
        return ["p", "q"]
    return [f"x{i}" for i in range(1, n + 1)]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PreconditionError(message)


def discrete(n: int = 2) -> FiniteSpace:
    _require(n >= 1, "discrete(n) needs n >= 1")
    return validate_space(_labels(n), 1.0 - np.eye(n))


def indiscrete(n: int = 2) -> FiniteSpace:
    _require(n >= 1, "indiscrete(n) needs n >= 1")
    return validate_space(_labels(n), np.zeros((n, n)))


def scaled_discrete(n: int = 2, a: float = 1.0) -> FiniteSpace:
    _require(n >= 1 and a >= 0, "scaled_discrete(n, a) needs n >= 1 and a >= 0")
    return validate_space(_labels(n), a * (1.0 - np.eye(n)))


def euclid_points(values: Sequence[float]) -> FiniteSpace:
    _require(len(values) >= 1, "euclid_points needs at least one value")
    grid = np.asarray(values, dtype=float)
    return validate_space(list(values), np.abs(grid[:, None] - grid[None, :]), tol=settings.tol_cmp)


def oneway(n: int = 2) -> FiniteSpace:
    """d(x_i, x_j) = 0 if i <= j else 1; for n = 2, d(p, q) = 0 and d(q, p) = 1."""
    _require(n >= 1, "oneway(n) needs n >= 1")
    return validate_space(_labels(n), np.tril(np.ones((n, n)), k=-1))


def lu_grid(values: Sequence[float], i: int, n: int) -> FiniteSpace:
    """Quasi-metric on values^n with
    d_i(x, y) = min(1, max(max_{j != i} (x_j - y_j)^+, (y_i - x_i)^+)).

    ``i`` is 1-based. At x = 0_n every d_i(0_n, a) equals a_i for a in [0, 1)^n.
    """
    _require(n >= 1 and 1 <= i <= n, "lu_grid needs n >= 1 and 1 <= i <= n")
    _require(len(values) >= 1 and all(v >= 0 for v in values), "lu_grid values must be nonnegative")
    points = list(itertools.product([float(v) for v in values], repeat=n))
    P = np.asarray(points)
    diff = P[:, None, :] - P[None, :, :]  # x - y
    others = np.delete(diff, i - 1, axis=2)
    lower = np.maximum(others, 0.0).max(axis=2) if n > 1 else np.zeros(diff.shape[:2])
    upper = np.maximum(-diff[:, :, i - 1], 0.0)
    D = np.minimum(1.0, np.maximum(lower, upper))
    return validate_space(points, D, tol=settings.tol_cmp)


BUILTIN_SPACES = {
    "discrete": discrete,
    "indiscrete": indiscrete,
    "scaled_discrete": scaled_discrete,
    "euclid_points": euclid_points,
    "oneway": oneway,
    "lu_grid": lu_grid,
}


def builtin_space(name: str, **params: Any) -> FiniteSpace:
    try:
        factory = BUILTIN_SPACES[name.replace("-", "_")]
    except KeyError:
        raise PreconditionError(f"unknown builtin space {name!r}; known: {sorted(BUILTIN_SPACES)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise PreconditionError(f"invalid parameters for {name}: {exc}") from exc


def two_point_pq(a: Sequence[float]) -> SpaceFamily:
    """Products family on {p, q}: member j is a_j times the discrete metric.

    For a nonzero a with F(a) = 0 the points (p, ..., p) and (q, ..., q) are
    at aggregated distance 0 while the product topology separates them.
    """
    _require(len(a) >= 1, "two_point_pq needs a nonempty tuple")
    return SpaceFamily(mode=AggregationMode.PRODUCTS, members=tuple(scaled_discrete(2, v) for v in a))


def two_point_sets(a: Sequence[float], quasi: bool = False) -> SpaceFamily:
    """Sets family on {p, q} with d_j(p, q) = a_j.

    Zero coordinates get the indiscrete pseudometric, or with ``quasi`` the
    oneway quasi-metric (d(p, q) = 0, d(q, p) = 1).
    """
    _require(len(a) >= 1, "two_point_sets needs a nonempty tuple")
    members = [
        oneway(2) if quasi and value == 0 else scaled_discrete(2, value) for value in a
    ]
    return SpaceFamily(mode=AggregationMode.SETS, members=tuple(members))


def lu_family(values: Sequence[float], n: int) -> SpaceFamily:
    """Sets family (lu_grid(values, i, n))_{i=1..n} on values^n."""
    return SpaceFamily(
        mode=AggregationMode.SETS, members=tuple(lu_grid(values, i, n) for i in range(1, n + 1))
    )


BUILTIN_FAMILIES = {
    "two_point_pq": two_point_pq,
    "two_point_sets": two_point_sets,
    "lu": lu_family,
}


def builtin_family(name: str, **params: Any) -> SpaceFamily:
    try:
        factory = BUILTIN_FAMILIES[name.replace("-", "_")]
    except KeyError:
        raise PreconditionError(f"unknown builtin family {name!r}; known: {sorted(BUILTIN_FAMILIES)}") from None
    return factory(**params)


def random_space(rng: np.random.Generator, size: int, symmetric: bool = False) -> FiniteSpace:
    """Quasi-pseudometric from the shortest-path closure of small integer weights.

    Integer weights keep the closure exact, so the result passes the exact
    axiom checks.
    """
    _require(size >= 1, "random_space needs size >= 1")
    W = rng.integers(1, 6, size=(size, size)).astype(float)
    W[rng.random((size, size)) < 0.3] = 0.0
    if symmetric:
        W = np.minimum(W, W.T)
    np.fill_diagonal(W, 0.0)
    for k in range(size):
        W = np.minimum(W, W[:, k, None] + W[None, k, :])
    return validate_space(_labels(size), W)


def random_family(
    rng: np.random.Generator, mode: AggregationMode, members: int, size: int, symmetric: bool = False
) -> SpaceFamily:
    if mode == AggregationMode.SETS:
        spaces = [random_space(rng, size, symmetric) for _ in range(members)]
    else:
        spaces = [random_space(rng, int(rng.integers(1, size + 1)), symmetric) for _ in range(members)]
    return SpaceFamily(mode=mode, members=tuple(spaces))


# Matrix files: {"points": [...], "matrix": [[...], ...]}


def load_space(path: Union[str, Path]) -> FiniteSpace:
    payload = SpacePayload.model_validate_json(Path(path).read_text())
    return validate_space(payload.points, payload.matrix)


def space_from_payload(payload: Union[SpacePayload, Dict[str, Any]]) -> FiniteSpace:
    if isinstance(payload, dict):
        payload = SpacePayload.model_validate(payload)
    return validate_space(payload.points, payload.matrix)


def dump_space(space: FiniteSpace, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(space.to_payload(), indent=2))


def describe_space(space: FiniteSpace) -> Dict[str, Any]:
    return {**space.to_payload(), "axiom_class": space.axiom_class.value}
