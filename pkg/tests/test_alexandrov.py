import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.errors import CapExceededError, PreconditionError
from src.models import AggregationMode, NeighborhoodMap, TopologyOrder
from src.services import alexandrov, sampling, spaces
from src.services.aggregators import parse_spec
from src.services.sampling import Stream


def nmap(points, *neighborhoods):
    return NeighborhoodMap(points=tuple(points), neighborhoods=tuple(frozenset(U) for U in neighborhoods))


def test_minimal_neighborhoods_of_oneway():
    U = alexandrov.minimal_neighborhoods(spaces.oneway(2))
    assert U.neighborhoods == (frozenset({0, 1}), frozenset({1}))
    assert alexandrov.describe_map(U) == [{"point": "p", "U": ["p", "q"]}, {"point": "q", "U": ["q"]}]


def test_minimal_neighborhoods_read_zero_up_to_tolerance():
    """Distances below tol_zero count as zero, and chains of them stay inside one neighborhood."""
    rounded = spaces.validate_space(["a", "b", "c"], [[0, 0, 5e-10], [1, 0, 0], [1, 1, 0]], tol=1e-9)
    U = alexandrov.minimal_neighborhoods(rounded)
    assert U.neighborhoods == (frozenset({0, 1, 2}), frozenset({1, 2}), frozenset({2}))
    assert alexandrov.minimal_neighborhoods(rounded, tol=0.0).neighborhoods == U.neighborhoods
    chained = spaces.validate_space(["a", "b", "c"], [[0, 8e-10, 1.5e-9], [1, 0, 8e-10], [1, 1, 0]])
    assert alexandrov.minimal_neighborhoods(chained).neighborhoods == U.neighborhoods
    assert alexandrov.minimal_neighborhoods(chained, tol=0.0).neighborhoods == tuple(
        frozenset({i}) for i in range(3)
    )


def test_neighborhood_map_invariants():
    with pytest.raises(ValidationError):
        nmap("ab", {1}, {1})
    with pytest.raises(ValidationError):
        nmap("abc", {0, 1}, {1, 2}, {2})


def test_compare_orders():
    indiscrete = nmap("ab", {0, 1}, {0, 1})
    discrete = nmap("ab", {0}, {1})
    assert alexandrov.compare(indiscrete, discrete) == TopologyOrder.FIRST_COARSER_STRICT
    assert alexandrov.compare(discrete, indiscrete) == TopologyOrder.SECOND_COARSER_STRICT
    assert alexandrov.compare(discrete, discrete) == TopologyOrder.EQUAL

    left = nmap("abc", {0, 1}, {1}, {2})
    right = nmap("abc", {0}, {1}, {0, 2})
    assert alexandrov.compare(left, right) == TopologyOrder.INCOMPARABLE
    assert alexandrov.inclusion_witness(left, right) == 2


def test_compare_needs_shared_points():
    with pytest.raises(PreconditionError):
        alexandrov.compare(nmap("ab", {0}, {1}), nmap("ac", {0}, {1}))


def test_product_neighborhoods_match_max_aggregation():
    """max vanishes only at 0, so its zero balls are the product boxes."""
    members = [spaces.oneway(2), spaces.discrete(2)]
    product = alexandrov.product_neighborhoods([alexandrov.minimal_neighborhoods(m) for m in members])
    assert product.neighborhoods[0] == frozenset({0, 2})
    aggregated = alexandrov.minimal_neighborhoods(spaces.product_aggregate(parse_spec("max"), members))
    assert product.points == aggregated.points
    assert product.neighborhoods == aggregated.neighborhoods


def test_product_neighborhoods_cap():
    U = alexandrov.minimal_neighborhoods(spaces.discrete(2))
    with pytest.raises(CapExceededError):
        alexandrov.product_neighborhoods([U, U], cap=3)
    with pytest.raises(PreconditionError):
        alexandrov.product_neighborhoods([])


def test_supremum_intersects():
    maps = [alexandrov.minimal_neighborhoods(spaces.oneway(2)), alexandrov.minimal_neighborhoods(spaces.indiscrete(2))]
    assert alexandrov.supremum_neighborhoods(maps).neighborhoods == (frozenset({0, 1}), frozenset({1}))


def test_indicator_zero_preimage_breaks_product_inclusion():
    report = alexandrov.zero_preimage_counterexample(parse_spec("indicator"), (0.0, 1.0))
    assert report.order == TopologyOrder.SECOND_COARSER_STRICT
    assert not report.left_in_right
    assert report.right_in_left
    assert report.witness_point == ["p", "p"]
    assert report.left_U == [["p", "p"], ["q", "p"]]
    assert len(report.right_U) == 4
    assert not report.all_members_metric


@pytest.mark.parametrize("quasi", [False, True])
def test_indicator_zero_preimage_breaks_sup_inclusion(quasi):
    report = alexandrov.zero_preimage_counterexample(
        parse_spec("indicator"), (0.0, 1.0), mode=AggregationMode.SETS, quasi=quasi
    )
    assert not report.left_in_right
    assert report.left == "supremum"


def test_zero_preimage_needs_a_witness():
    with pytest.raises(PreconditionError):
        alexandrov.zero_preimage_counterexample(parse_spec("max"), (1.0, 0.0))


def test_projection_on_sets():
    family = [spaces.discrete(2), spaces.indiscrete(2)]
    report = alexandrov.check_sup_inclusion(parse_spec("proj(2)"), family)
    assert report.order == TopologyOrder.SECOND_COARSER_STRICT


def test_metric_members_carry_the_note():
    report = alexandrov.check_product_inclusion(parse_spec("max"), [spaces.discrete(2), spaces.discrete(3)])
    assert report.order == TopologyOrder.EQUAL
    assert report.all_members_metric
    assert report.note is not None
    assert report.witness_point is None


@pytest.mark.parametrize("text", ["max", "pnorm(2)", "series(3)", "wsum(1,0,2)"])
def test_aggregated_topology_is_coarser(cfg, text):
    """F(0) = 0 and monotone: product zero balls sit inside the aggregated ones."""
    rng = sampling.generator(cfg, Stream.SPACES, 3)
    F = parse_spec(text)
    vanishes_only_at_zero = text in ("max", "pnorm(2)", "series(3)")
    for _ in range(20):
        family = spaces.random_family(rng, AggregationMode.PRODUCTS, F.fixed_arity() or 3, 3)
        report = alexandrov.check_product_inclusion(F, family)
        assert report.right_in_left
        if vanishes_only_at_zero:
            assert report.order == TopologyOrder.EQUAL


def test_open_sets():
    assert len(alexandrov.open_sets(alexandrov.minimal_neighborhoods(spaces.discrete(2)))) == 4
    assert alexandrov.open_sets(alexandrov.minimal_neighborhoods(spaces.oneway(2))) == {
        frozenset(),
        frozenset({1}),
        frozenset({0, 1}),
    }
    with pytest.raises(CapExceededError):
        alexandrov.open_sets(alexandrov.minimal_neighborhoods(spaces.discrete(5)), limit=4)


@pytest.mark.slow
def test_random_zero_balls_are_transitive(cfg):
    rng = sampling.generator(cfg, Stream.SPACES, 11)
    for _ in range(1000):
        S = spaces.random_space(rng, int(rng.integers(1, 7)))
        U = alexandrov.minimal_neighborhoods(S)
        for x, y, z in itertools.product(range(len(S.points)), repeat=3):
            if y in U.neighborhoods[x] and z in U.neighborhoods[y]:
                assert z in U.neighborhoods[x]


def _order_from_open_sets(A, B):
    left, right = alexandrov.open_sets(A), alexandrov.open_sets(B)
    if left == right:
        return TopologyOrder.EQUAL
    if left < right:
        return TopologyOrder.FIRST_COARSER_STRICT
    if right < left:
        return TopologyOrder.SECOND_COARSER_STRICT
    return TopologyOrder.INCOMPARABLE


@pytest.mark.slow
def test_compare_matches_open_set_inclusion(cfg):
    """compare() on zero-ball maps agrees with inclusion of the enumerated topologies."""
    rng = sampling.generator(cfg, Stream.SPACES, 12)
    seen = set()
    for _ in range(500):
        size = int(rng.integers(1, 5))
        S = spaces.random_space(rng, size)
        if rng.random() < 0.5:
            T = spaces.validate_space(S.points, np.asarray(S.distances()).T)
        else:
            T = spaces.random_space(rng, size)
        A, B = alexandrov.minimal_neighborhoods(S), alexandrov.minimal_neighborhoods(T)
        order = alexandrov.compare(A, B)
        assert order == _order_from_open_sets(A, B)
        seen.add(order)
    assert seen == set(TopologyOrder)
