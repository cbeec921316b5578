import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.errors import DimensionError, EnumerationError
from src.models import NonNegTuple, SamplerConfig
from src.services import sampling
from src.services.sampling import Stream


def t(*values):
    return NonNegTuple.of(values)


def test_is_triangle_triplet():
    """Componentwise triangle test on small hand-made triples."""
    assert sampling.is_triangle_triplet(t(1, 2), t(1, 1), t(0, 1))
    assert sampling.is_triangle_triplet(t(0), t(0), t(0))
    assert not sampling.is_triangle_triplet(t(3), t(1), t(1))
    assert not sampling.is_triangle_triplet(t(1, 5), t(1, 1), t(0, 1))


def test_is_triangle_triplet_arity_mismatch():
    """Mixed arities are rejected."""
    with pytest.raises(DimensionError):
        sampling.is_triangle_triplet(t(1), t(1, 1), t(0))


def test_sample_triplet_is_deterministic(cfg):
    """Draw i depends only on (seed, stream, i)."""
    first = sampling.sample_triplet(cfg, 3, index=17)
    second = sampling.sample_triplet(cfg, 3, index=17)
    other_seed = sampling.sample_triplet(cfg.model_copy(update={"seed": 7}), 3, index=17)
    assert first == second
    assert first != other_seed


def test_draw_block_is_chunk_aligned(cfg):
    """A block starting mid-chunk equals the matching slice of a longer block."""
    draw = sampling.triplet_draw(2, cfg.scale)
    whole = sampling.draw_block(cfg, Stream.TRIPLET, 0, 3000, draw)
    part = sampling.draw_block(cfg, Stream.TRIPLET, 1000, 1500, draw)
    for full, piece in zip(whole, part):
        np.testing.assert_array_equal(full[1000:2500], piece)


def test_sampled_triplets_satisfy_the_triangle(cfg):
    """Every draw of the triplet stream is a triangle triplet."""
    A, B, C = sampling.draw_block(cfg, Stream.TRIPLET, 0, cfg.budget, sampling.triplet_draw(4, cfg.scale))
    assert sampling.triplet_mask(A, B, C).all()
    assert (A >= 0).all() and (B >= 0).all() and (C >= 0).all()


def test_sampled_values_are_dyadic(cfg):
    """Coordinates carry at most 20 fractional bits, so sums stay exact."""
    (X,) = sampling.draw_block(cfg, Stream.TUPLE, 0, 2000, sampling.tuple_draw(3, cfg.scale))
    scaled = X * 2.0**sampling.FRACTION_BITS
    np.testing.assert_array_equal(scaled, np.floor(scaled))


def test_mixture_hits_zero_coordinates(cfg):
    """About a quarter of the mixture coordinates are exactly zero."""
    (X,) = sampling.draw_block(cfg, Stream.TUPLE, 0, 4000, sampling.tuple_draw(1, cfg.scale))
    share = float((X == 0).mean())
    assert 0.18 < share < 0.32


def test_dominated_draws(cfg):
    """The dominated stream only guarantees a <= b + c."""
    a, b, c = sampling.sample_dominated(cfg, 2, index=3)
    assert a <= b + c


def test_triplet_stream_covers_both_sides(cfg):
    """a reaches below min(b, c) and above max(b, c) somewhere in the stream."""
    a, b, c = sampling.draw_block(cfg, Stream.TRIPLET, 0, 10_000, sampling.triplet_draw(2, cfg.scale))
    assert sampling.triplet_mask(a, b, c).all()
    assert (a < np.minimum(b, c)).any()
    assert (a > np.maximum(b, c)).any()


def test_dominated_stream_leaves_the_triangle(cfg):
    """Dominated draws include a < |b - c|, which triangle triplets never produce."""
    a, b, c = sampling.draw_block(cfg, Stream.DOMINATED, 0, 10_000, sampling.dominated_draw(1, cfg.scale))
    assert (a <= b + c).all()
    assert (a < np.abs(b - c)).any()


def test_positive_triplets_stay_in_the_cone(cfg):
    """Every tuple is 0_n or strictly positive in every coordinate."""
    draw = sampling.positive_triplet_draw(3, cfg.scale)
    blocks = sampling.draw_block(cfg, Stream.POSITIVE_TRIPLET, 0, 3000, draw)
    assert sampling.triplet_mask(*blocks).all()
    for X in blocks:
        zero = (X == 0).all(axis=1)
        positive = (X > 0).all(axis=1)
        assert (zero | positive).all()


def test_corner_stream_is_lexicographic(cfg):
    """The full grid starts at 0_n and lists levels^n in order."""
    corners = sampling.corner_stream(cfg, 2)
    assert len(corners) == len(cfg.grid_levels) ** 2
    assert corners[0].is_zero()
    assert corners[1].values == (0.0, cfg.grid_levels[1])
    assert corners[-1].values == (cfg.grid_levels[-1],) * 2


def test_corner_stream_cap(cfg):
    """Enumerating above the cap is refused."""
    with pytest.raises(EnumerationError):
        sampling.corner_stream(cfg, 5)


def test_corner_points_sparse_fallback(cfg):
    """Above the cap the checkers fall back to at most two nonzero coordinates."""
    corners = sampling.corner_points(cfg, 6)
    assert corners.shape[1] == 6
    assert ((corners > 0).sum(axis=1) <= 2).all()
    assert (corners[0] == 0).all()


def test_scan_chunks_ignores_worker_count(cfg):
    """The smallest hit index wins regardless of how chunks are scheduled."""
    draw = sampling.tuple_draw(2, cfg.scale)

    def examine(start, count):
        (X,) = sampling.draw_block(cfg, Stream.TUPLE, start, count, draw)
        hits = np.flatnonzero(X.sum(axis=1) > 18.0)
        return None if hits.size == 0 else (start + int(hits[0]), X[hits[0]].tolist())

    serial = sampling.scan_chunks(cfg, cfg.budget, examine)
    parallel = sampling.scan_chunks(cfg.model_copy(update={"workers": 4}), cfg.budget, examine)
    assert serial is not None
    assert serial == parallel


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), index=st.integers(min_value=0, max_value=500))
def test_any_seed_gives_triangle_triplets(seed, index):
    """Property: the sampler never produces an invalid triplet."""
    cfg = SamplerConfig(seed=seed, chunk_size=64)
    triplet = sampling.sample_triplet(cfg, 3, index=index)
    assert sampling.is_triangle_triplet(triplet.a, triplet.b, triplet.c)
