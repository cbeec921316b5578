import numpy as np
import pytest

from src.core.errors import DimensionError, PreconditionError, UnknownPointError
from src.models import ConvergenceMode, ProbeSequence, SequenceVariant, StructuredImage
from src.services import classifier, probe, sampling
from src.services.aggregators import parse_spec
from src.services.demos import usc_projection_image
from src.services.sampling import Stream

K = 1000


def harmonic(limit=(0.0,), count=K):
    return ProbeSequence(name="harmonic", terms=[(1.0 / k,) for k in range(1, count + 1)], limit=limit)


def test_tail_protocol():
    steps = np.array([1.0 / k for k in range(1, K + 1)])
    assert probe.tail_protocol(steps) is None
    assert probe.tail_protocol(np.ones(K)) == 900
    assert probe.tail_protocol(np.zeros(K)) is None
    slow = np.concatenate([np.zeros(900), np.full(100, 1e-3)])
    assert probe.tail_protocol(slow) == 900
    assert probe.tail_protocol(slow, tau=1e-2) is None


def test_tail_protocol_rejects_a_stuck_tail():
    """A tail parked at a small constant never reaches 0, even far below the head."""
    stuck = np.array([1.0] + [1.0 / 20] * (K - 1))
    assert probe.tail_protocol(stuck) == 900
    rising = np.concatenate([np.full(900, 1.0), np.linspace(0.01, 0.05, 100)])
    assert probe.tail_protocol(rising) == 900
    family = probe.null_sequence_family(1, K)
    seq = ProbeSequence(name="stuck", terms=[(1.0,)] + [(1.0 / 20,)] * (K - 1), limit=(0.0,))
    verdict = probe.converges(family, seq, ConvergenceMode.PRODUCT_TOPOLOGY)
    assert not verdict.converges
    assert verdict.epsilon_witness == (1e-6, 900)


def test_default_sequences():
    names = [seq.name for seq in probe.default_sequences(3, 200)]
    assert names == ["diagonal", "axis-1", "axis-2", "axis-3", "constant"]
    assert [seq.name for seq in probe.default_sequences(1, 200)] == ["diagonal", "constant"]
    assert all(len(seq.terms) == 200 for seq in probe.default_sequences(2, 200))


def test_family_needs_members():
    with pytest.raises(DimensionError):
        probe.null_sequence_family(0)


def test_member_distances_checks_points():
    family = probe.null_sequence_family(1, K)
    bad = ProbeSequence(name="bad", terms=[(0.3,)] * 200, limit=(0.0,))
    with pytest.raises(UnknownPointError):
        probe.member_distances(family, bad)
    with pytest.raises(PreconditionError):
        probe.member_distances(family, ProbeSequence(name="empty", terms=[], limit=(0.0,)))
    with pytest.raises(DimensionError):
        probe.member_distances(family, ProbeSequence(name="wide", terms=[(0.5, 0.5, 0.5)], limit=(0.0, 0.0)))


def test_single_coordinate_terms_are_broadcast():
    D = probe.member_distances(probe.null_sequence_family(2, K), harmonic())
    assert D.shape == (K, 2)
    np.testing.assert_array_equal(D[:, 0], D[:, 1])


def test_harmonic_sequence_converges():
    family = probe.null_sequence_family(1, K)
    verdict = probe.converges(family, harmonic(), ConvergenceMode.PRODUCT_TOPOLOGY)
    assert verdict.converges
    assert verdict.epsilon_witness is None


def test_upper_variant_is_asymmetric():
    """1/k stays 1 away from 1 on the line, but the upper distance from 1 down to 1/k is 0."""
    seq = harmonic(limit=(1.0,))
    line = probe.converges(probe.null_sequence_family(1, K), seq, ConvergenceMode.PRODUCT_TOPOLOGY)
    upper = probe.converges(
        probe.null_sequence_family(1, K, SequenceVariant.UPPER), seq, ConvergenceMode.PRODUCT_TOPOLOGY
    )
    assert not line.converges
    assert line.epsilon_witness[1] == 900
    assert upper.converges


def test_converges_preconditions(spec):
    family = probe.null_sequence_family(1, K)
    with pytest.raises(PreconditionError):
        probe.converges(family, harmonic(count=50), ConvergenceMode.PRODUCT_TOPOLOGY)
    with pytest.raises(PreconditionError):
        probe.converges(family, harmonic(), ConvergenceMode.AGGREGATED)


def test_jump_breaks_aggregated_convergence(spec):
    family = probe.null_sequence_family(1, K)
    verdict = probe.converges(family, harmonic(), ConvergenceMode.AGGREGATED, spec("jump"))
    assert not verdict.converges
    assert verdict.epsilon_witness == (1e-6, 900)


def test_strongness_consistent_for_max(spec, cfg, tol):
    family = probe.null_sequence_family(2, K)
    verdict = probe.strongness_probe(spec("max", 2), family, cfg=cfg, tol=tol)
    assert verdict.consistent
    assert verdict.samples_used == verdict.budget == 4


def test_strongness_falsified_for_indicator(spec, cfg, tol):
    family = probe.null_sequence_family(2, K)
    verdict = probe.strongness_probe(spec("indicator"), family, cfg=cfg, tol=tol)
    assert verdict.falsified
    assert verdict.check == "strongness_probe"
    assert verdict.witness == {
        "sequence": "diagonal",
        "product_topology": True,
        "aggregated": False,
        "epsilon": 1e-6,
        "index": 900,
    }


def test_strongness_needs_vanishing(spec, cfg, tol):
    with pytest.raises(PreconditionError):
        probe.strongness_probe(spec("shift"), probe.null_sequence_family(1, K), cfg=cfg, tol=tol)


def test_probe_sequences_rows(spec):
    family = probe.null_sequence_family(2, 200)
    rows = probe.probe_sequences(spec("pnorm(2)"), family, probe.default_sequences(2, 200))
    assert [row["sequence"] for row in rows] == ["diagonal", "axis-1", "axis-2", "constant"]
    assert all(row["reference"].converges and row["aggregated"].converges for row in rows)


def test_image_samples():
    points, isolated = probe.image_samples(usc_projection_image(), ray_depth=10)
    assert points.shape == (12, 2)
    assert isolated.tolist() == [True] + [False] * 11
    assert points[1].tolist() == [1.0, 1.0]
    assert points[-1].tolist() == [1.0, 2.0**-10]


def test_usc_falsified_for_projection_on_unit_offset(spec, tol):
    verdict = probe.check_usc_at_zero(spec("proj(2)", 2), usc_projection_image(), tol=tol)
    assert verdict.falsified
    assert verdict.witness["radius"] == 0.5
    assert verdict.witness["delta"] == 2.0**-30
    assert verdict.witness["a"] == [1.0, 2.0**-31]


def test_usc_consistent_for_max(spec, tol):
    assert probe.check_usc_at_zero(spec("max", 2), usc_projection_image(), tol=tol).consistent


def test_usc_grids_must_descend(spec):
    with pytest.raises(PreconditionError):
        probe.check_usc_at_zero(spec("max", 2), usc_projection_image(), radius_grid=(0.1, 0.5))
    with pytest.raises(PreconditionError):
        probe.check_usc_at_zero(spec("max", 2), usc_projection_image(), delta_grid=())


def test_restricted_continuity(spec, cfg, tol):
    img = probe.load_image({"isolated": [[0.0]], "rays": [{"curve": "identity"}]})
    verdict = probe.check_restricted_continuity_at_zero(spec("jump"), img, cfg, tol)
    assert verdict.falsified
    assert verdict.witness["a"][0] < verdict.witness["delta"]
    assert probe.check_restricted_continuity_at_zero(spec("proj(2)", 2), usc_projection_image(), cfg, tol).consistent
    with pytest.raises(PreconditionError):
        probe.check_restricted_continuity_at_zero(
            spec("max", 2), StructuredImage(isolated=((1.0, 1.0),)), cfg, tol
        )


def test_restricted_continuity_reaches_steep_rays(spec, cfg, tol):
    """A ray leaving 0 faster than the deepest grid step still lands in the smallest box."""
    img = probe.load_image({"isolated": [[0.0]], "rays": [{"base": [0.0], "direction": [20.0]}]})
    points, _ = probe.image_samples(img)
    delta = cfg.scale * 2.0**-tol.continuity_depth
    assert not (points[1:] < delta).all(axis=1).any()
    verdict = probe.check_restricted_continuity_at_zero(spec("jump"), img, cfg, tol)
    assert verdict.falsified
    assert verdict.witness["a"] == [delta / 2]
    assert verdict.witness["F(a)"] == 1.0
    steep = probe.load_image({"isolated": [[0.0, 0.0]], "rays": [{"base": [0.0, 0.0], "direction": [64.0, 8.0]}]})
    assert probe.check_restricted_continuity_at_zero(spec("max", 2), steep, cfg, tol).consistent
    assert probe.check_restricted_continuity_at_zero(spec("indicator"), steep, cfg, tol).falsified


def test_load_image():
    img = probe.load_image({"isolated": [[0, 0]], "rays": [{"curve": "unit-offset"}]})
    assert img.arity == 2
    assert img.rays[0].base == (1.0, 0.0)
    assert probe.describe_image(img)["isolated"] == [[0.0, 0.0]]
    explicit = probe.load_image({"rays": [{"base": [0, 0], "direction": [1, 2]}]})
    assert explicit.arity == 2


@pytest.mark.parametrize(
    "payload",
    [
        {"rays": [{"curve": "diagonal"}]},
        {"isolated": [[0, 0]], "rays": [{"curve": "spiral"}]},
        {"isolated": [[0]], "rays": [{"curve": "unit-offset"}]},
        {"rays": [{"base": [-1, 0], "direction": [1, 1]}]},
        {"isolated": [[0, 0], [0, 0, 0]]},
        {"isolated": [[-1, 0]]},
    ],
)
def test_load_image_rejects(payload):
    with pytest.raises(PreconditionError):
        probe.load_image(payload)


@pytest.mark.parametrize(
    "text", ["max", "min", "wsum(1,2)", "pnorm(2)", "series(2)", "dobos", "jump", "indicator", "proj(2)"]
)
def test_strongness_matches_continuity_at_zero(text, spec, cfg, tol):
    """Default null sequences converge in the product topology, so the probe sees continuity at 0."""
    arity = parse_spec(text).fixed_arity() or 2
    F = spec(text, arity)
    verdict = probe.strongness_probe(F, probe.null_sequence_family(arity, 200), cfg=cfg, tol=tol)
    assert verdict.falsified == classifier.check_continuity_at_zero(F, cfg, tol).falsified


@pytest.mark.parametrize("text", ["max", "pnorm(2)", "wsum(1,1)", "proj(2)", "indicator"])
def test_usc_consistent_on_isolated_images(text, spec, cfg, tol):
    """Finitely many isolated points keep positive values away from 0."""
    F = spec(text, 2)
    for index in range(20):
        rng = sampling.generator(cfg, Stream.SPACES, 100 + index)
        rows = rng.integers(0, 9, size=(int(rng.integers(1, 7)), 2)) / 4.0
        if rng.random() < 0.5:
            rows = np.vstack([np.zeros((1, 2)), rows])
        img = StructuredImage(isolated=tuple(tuple(float(v) for v in row) for row in rows))
        assert probe.check_usc_at_zero(F, img, tol=tol).consistent
