"""Finite ball topologies through minimal open neighborhoods.

On a finite quasi-pseudometric space the zero-distance ball
U(x) = {y : d(x, y) = 0} is the smallest open set containing x, so a
topology is fully described by one boolean membership matrix. Distances up
to tol_zero count as zero. Comparisons and products reduce to matrix
operations on those.
"""

import itertools
from typing import FrozenSet, List, Optional, Sequence, Set

import numpy as np

from src.core import get_logger, settings
from src.core.errors import CapExceededError, PreconditionError
from src.models import (
    AggregationMode,
    AggregatorSpec,
    FiniteSpace,
    InclusionReport,
    NeighborhoodMap,
    TopologyOrder,
)
from src.services import spaces
from src.services.aggregators import TupleLike, as_row, evaluate

logger = get_logger(__name__)

METRIC_MEMBERS_NOTE = (
    "every member is a metric, so both topologies are discrete on a finite set; "
    "equality here says nothing about strongness"
)


def _from_membership(points: Sequence, member: np.ndarray) -> NeighborhoodMap:
    return NeighborhoodMap(
        points=tuple(points),
        neighborhoods=tuple(frozenset(int(y) for y in np.flatnonzero(row)) for row in member),
    )


def minimal_neighborhoods(S: FiniteSpace, tol: Optional[float] = None) -> NeighborhoodMap:
    """U(x) = {y : d(x, y) <= tol_zero}, closed under chains of such near-zero steps.

    The model re-checks the Alexandrov invariants.
    """
    tol = settings.tol_zero if tol is None else tol
    member = S.distances() <= tol
    while True:
        reach = (member.astype(np.float32) @ member.astype(np.float32) > 0) | member
        if (reach == member).all():
            break
        member = reach
    return _from_membership(S.points, member)


def product_neighborhoods(maps: Sequence[NeighborhoodMap], cap: Optional[int] = None) -> NeighborhoodMap:
    """U((x_i)) = product of the U_i(x_i), points in lexicographic order."""
    if not maps:
        raise PreconditionError("a product needs at least one factor")
    cap = cap or settings.product_cap
    total = int(np.prod([len(m.points) for m in maps]))
    if total > cap:
        raise CapExceededError("product topology", total, cap)
    member = np.ones((1, 1), dtype=np.uint8)
    for factor in maps:
        member = np.kron(member, factor.membership().astype(np.uint8))
    points = list(itertools.product(*(m.points for m in maps)))
    return _from_membership(points, member.astype(bool))


def _same_points(maps: Sequence[NeighborhoodMap]) -> None:
    first = maps[0].points
    for other in maps[1:]:
        if other.points != first:
            raise PreconditionError("neighborhood maps are defined on different point lists")


def supremum_neighborhoods(maps: Sequence[NeighborhoodMap]) -> NeighborhoodMap:
    """U(x) = intersection of the U_i(x) on a shared point list."""
    if not maps:
        raise PreconditionError("a supremum needs at least one topology")
    _same_points(maps)
    member = np.logical_and.reduce([m.membership() for m in maps])
    return _from_membership(maps[0].points, member)


def _inclusions(A: NeighborhoodMap, B: NeighborhoodMap):
    _same_points([A, B])
    a, b = A.membership(), B.membership()
    # A is coarser than B (A subset B) iff U_B(x) is inside U_A(x) everywhere
    a_not_in_b = (b & ~a).any(axis=1)
    b_not_in_a = (a & ~b).any(axis=1)
    return a_not_in_b, b_not_in_a


def compare(A: NeighborhoodMap, B: NeighborhoodMap) -> TopologyOrder:
    a_not_in_b, b_not_in_a = _inclusions(A, B)
    a_in_b, b_in_a = not a_not_in_b.any(), not b_not_in_a.any()
    if a_in_b and b_in_a:
        return TopologyOrder.EQUAL
    if a_in_b:
        return TopologyOrder.FIRST_COARSER_STRICT
    if b_in_a:
        return TopologyOrder.SECOND_COARSER_STRICT
    return TopologyOrder.INCOMPARABLE


def inclusion_witness(A: NeighborhoodMap, B: NeighborhoodMap) -> Optional[int]:
    """First point x with U_B(x) not inside U_A(x), i.e. why A is not coarser than B."""
    a_not_in_b, _ = _inclusions(A, B)
    hits = np.flatnonzero(a_not_in_b)
    return int(hits[0]) if hits.size else None


def _report(
    left: NeighborhoodMap,
    right: NeighborhoodMap,
    left_name: str,
    right_name: str,
    all_metric: bool,
) -> InclusionReport:
    order = compare(left, right)
    witness = inclusion_witness(left, right)
    if witness is None:
        witness = inclusion_witness(right, left)
    return InclusionReport(
        order=order,
        left=left_name,
        right=right_name,
        left_in_right=order.first_in_second,
        right_in_left=order.second_in_first,
        witness_point=None if witness is None else spaces.printable(left.points[witness]),
        left_U=None if witness is None else [spaces.printable(p) for p in left.labels(witness)],
        right_U=None if witness is None else [spaces.printable(p) for p in right.labels(witness)],
        all_members_metric=all_metric,
        note=METRIC_MEMBERS_NOTE if all_metric else None,
    )


def check_product_inclusion(
    F: AggregatorSpec, fam: spaces.FamilyLike, cap: Optional[int] = None
) -> InclusionReport:
    """Product topology (left) against the topology of F o d_Pi (right)."""
    fam = spaces.make_family(AggregationMode.PRODUCTS, fam)
    aggregated = spaces.product_aggregate(F, fam, cap=cap)
    product = product_neighborhoods([minimal_neighborhoods(m) for m in fam.members], cap)
    report = _report(product, minimal_neighborhoods(aggregated), "product", "aggregated", fam.all_metric)
    logger.info("product inclusion", aggregator=F.label, order=report.order.value)
    return report


def check_sup_inclusion(F: AggregatorSpec, fam: spaces.FamilyLike) -> InclusionReport:
    """Supremum topology (left) against the topology of F o d_Delta (right)."""
    fam = spaces.make_family(AggregationMode.SETS, fam)
    aggregated = spaces.set_aggregate(F, fam)
    supremum = supremum_neighborhoods([minimal_neighborhoods(m) for m in fam.members])
    report = _report(supremum, minimal_neighborhoods(aggregated), "supremum", "aggregated", fam.all_metric)
    logger.info("supremum inclusion", aggregator=F.label, order=report.order.value)
    return report


def zero_preimage_counterexample(
    F: AggregatorSpec, witness: TupleLike, mode: AggregationMode = AggregationMode.PRODUCTS, quasi: bool = False
) -> InclusionReport:
    """Two-point family built from a nonzero a with F(a) = 0.

    In products mode the product topology is not coarser than the aggregated
    one; in sets mode the supremum topology is not.
    """
    a = as_row(witness)
    tol = settings.tol_zero
    if not (a.max() > tol and evaluate(F.bind(a.size), a) <= tol):
        raise PreconditionError("the witness must be nonzero with F(a) = 0")
    values = [float(v) for v in a]
    if mode == AggregationMode.PRODUCTS:
        return check_product_inclusion(F, spaces.two_point_pq(values))
    return check_sup_inclusion(F, spaces.two_point_sets(values, quasi=quasi))


def open_sets(U: NeighborhoodMap, limit: int = 12) -> Set[FrozenSet[int]]:
    """Every open set, as unions of minimal neighborhoods (small spaces only)."""
    if len(U.points) > limit:
        raise CapExceededError("open set enumeration", len(U.points), limit)
    opens: Set[FrozenSet[int]] = {frozenset()}
    for size in range(1, len(U.points) + 1):
        for chosen in itertools.combinations(U.neighborhoods, size):
            opens.add(frozenset().union(*chosen))
    return opens


def describe_map(U: NeighborhoodMap) -> List[dict]:
    return [
        {"point": spaces.printable(point), "U": [spaces.printable(p) for p in U.labels(i)]}
        for i, point in enumerate(U.points)
    ]
