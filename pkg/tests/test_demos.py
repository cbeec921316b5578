import pytest

from src.core.errors import PreconditionError
from src.services import demos


@pytest.mark.parametrize("name", list(demos.DEMOS))
def test_demo_expectations_are_met(name, cfg, tol):
    demo, results, expectations = demos.run_demo(name, cfg, tol)
    assert demo.name == name
    assert expectations
    failed = [e["expectation"] for e in expectations if not e["met"]]
    assert failed == []
    assert isinstance(results, dict)


def test_usc_projection_witness(cfg, tol):
    _, results, _ = demos.run_demo("usc-projection", cfg, tol)
    witness = results["usc"]["witness"]
    assert witness["a"] == [1.0, witness["delta"] / 2]


def test_lu_image_covers_the_grid(cfg, tol):
    _, results, _ = demos.run_demo("lu-image", cfg, tol)
    assert results["max_error"] == 0.0
    assert len(results["image"]) == 25


def test_indicator_sets_on_two_discrete_members(cfg, tol):
    _, results, _ = demos.run_demo("indicator-sets", cfg, tol)
    assert results["aggregated"]["matrix"] == [[0.0, 1.0], [1.0, 0.0]]
    assert results["supremum_inclusion"]["order"] == "equal"


def test_zero_preimage_witness_is_shrunk(cfg, tol):
    _, results, _ = demos.run_demo("zero-preimage-twopoint", cfg, tol)
    assert results["witness"] == [0.0, 1.0]


def test_unknown_demo():
    with pytest.raises(PreconditionError):
        demos.get_demo("nope")
