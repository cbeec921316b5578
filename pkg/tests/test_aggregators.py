import numpy as np
import pytest

from src.core.errors import DimensionError, DomainError, ParseError, PreconditionError
from src.models import AggregatorKind
from src.services.aggregators import (
    custom_names,
    evaluate,
    evaluate_batch,
    parse_spec,
    register_custom,
    resolve_arity,
    series_tail_bound,
)


def test_parse_fixed_grammar():
    """Every grammar entry parses to its kind and parameters."""
    assert parse_spec("max").kind == AggregatorKind.MAX
    assert parse_spec("  MIN ").kind == AggregatorKind.MIN
    wsum = parse_spec("wsum(1, 2.5, 0)")
    assert wsum.weights == (1.0, 2.5, 0.0)
    assert wsum.arity == 3
    assert parse_spec("pnorm(2)").p == 2.0
    assert parse_spec("series(16)").truncation == 16
    assert parse_spec("proj(2)").coordinate == 2
    assert parse_spec("dobos").fixed_arity() == 1
    assert parse_spec("indicator").fixed_arity() == 2


@pytest.mark.parametrize(
    "text, position",
    [
        ("pnorm(0.5)", 6),
        ("wsum(1,-2)", 7),
        ("series(2.5)", 7),
        ("proj(0)", 5),
        ("maxx", 0),
        ("max(2)", 3),
        ("wsum()", 5),
    ],
)
def test_parse_errors_report_positions(text, position):
    """Parse errors point at the offending character."""
    with pytest.raises(ParseError) as info:
        parse_spec(text)
    assert info.value.position == position


def test_parse_empty():
    with pytest.raises(ParseError):
        parse_spec("   ")


def test_label_round_trips_through_the_parser():
    """Labels are valid function specs."""
    for text in ("max", "wsum(1,2)", "pnorm(3)", "series(4)", "proj(1)", "jump"):
        spec = parse_spec(text)
        assert parse_spec(spec.label).label == spec.label


def test_evaluate_builtins():
    """Reference values for each builtin."""
    assert evaluate(resolve_arity(parse_spec("max"), 3), [1, 5, 2]) == 5
    assert evaluate(resolve_arity(parse_spec("min"), 2), [1, 0]) == 0
    assert evaluate(parse_spec("wsum(1,2)"), [3, 4]) == 11
    assert evaluate(resolve_arity(parse_spec("pnorm(2)"), 2), [3, 4]) == pytest.approx(5.0)
    assert evaluate(resolve_arity(parse_spec("series(2)"), 2), [1, 1]) == pytest.approx(0.375)
    assert evaluate(resolve_arity(parse_spec("proj(2)"), 3), [7, 8, 9]) == 8
    assert evaluate(parse_spec("jump"), [0]) == 0
    assert evaluate(parse_spec("jump"), [1e-12]) == 1
    assert evaluate(parse_spec("indicator"), [1, 0]) == 0
    assert evaluate(parse_spec("indicator"), [1, 3]) == 1


def test_dobos_values():
    """Identity up to 2, then 1 + 1/(a - 1)."""
    dobos = parse_spec("dobos")
    assert evaluate(dobos, [1.5]) == 1.5
    assert evaluate(dobos, [2.0]) == 2.0
    assert evaluate(dobos, [3.0]) == 1.5
    assert evaluate(dobos, [5.0]) == 1.25


def test_pnorm_does_not_overflow():
    """Large p and large entries stay finite."""
    value = evaluate(resolve_arity(parse_spec("pnorm(400)"), 2), [1e300, 1e300])
    assert np.isfinite(value)
    assert value == pytest.approx(1e300, rel=1e-2)


def test_series_accepts_shorter_arity():
    """Missing coordinates contribute nothing."""
    series = parse_spec("series(8)")
    assert evaluate(series.bind(1), [1.0]) == pytest.approx(0.25)
    with pytest.raises(DimensionError):
        series.bind(9)


def test_series_tail_bound():
    assert series_tail_bound(4) == 2.0**-4
    with pytest.raises(PreconditionError):
        series_tail_bound(0)


def test_batch_rejects_bad_input():
    """Negative, NaN and wrong-arity batches are refused."""
    spec = resolve_arity(parse_spec("max"), 2)
    with pytest.raises(DomainError):
        evaluate_batch(spec, np.array([[1.0, -1.0]]))
    with pytest.raises(DomainError):
        evaluate_batch(spec, np.array([[np.nan, 1.0]]))
    with pytest.raises(DimensionError):
        evaluate_batch(spec, np.array([[1.0, 2.0, 3.0]]))
    with pytest.raises(DimensionError):
        evaluate(parse_spec("indicator"), [1.0])


def test_variadic_needs_an_arity():
    with pytest.raises(PreconditionError):
        resolve_arity(parse_spec("max"))
    assert resolve_arity(parse_spec("max"), 4).arity == 4


def test_custom_registry():
    """Custom names parse through the registry and are evaluated in batch."""
    register_custom("double_first", lambda A: 2.0 * A[:, 0], arity=1, description="test only")
    spec = parse_spec("double_first")
    assert spec.kind == AggregatorKind.CUSTOM
    assert evaluate(spec, [1.5]) == 3.0
    assert {"zero", "square", "shift", "double_first"} <= set(custom_names())


def test_custom_names_cannot_shadow_builtins():
    with pytest.raises(PreconditionError):
        register_custom("max", lambda A: A[:, 0])


def test_custom_negative_values_are_refused():
    register_custom("negative_test", lambda A: -A[:, 0], arity=1)
    with pytest.raises(DomainError):
        evaluate(parse_spec("negative_test"), [1.0])
