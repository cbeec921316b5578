"""Triangle triplets, deterministic samplers and the corner grid.

Every random draw is addressed by (seed, stream, index). Draws are produced
in chunks of ``cfg.chunk_size`` and chunk ``c`` owns its own PCG64 stream
seeded by ``SeedSequence([seed, stream, c])``, so results do not depend on
how many workers evaluate the chunks or in which order.

Sampled coordinates are dyadic rationals with 20 fractional bits, capped at
2^30, which keeps every sum in the triangle inequalities exact in double
precision.
"""

import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core import get_logger
from src.core.errors import DimensionError, EnumerationError, PreconditionError
from src.models import NonNegTuple, SamplerConfig, TriangleTriplet

logger = get_logger(__name__)

FRACTION_BITS = 20
_QUANTUM = float(2**FRACTION_BITS)
_CEILING = float(2**30)

# (chunk rng, rows) -> tuple of arrays with `rows` leading entries
ChunkDraw = Callable[[np.random.Generator, int], Tuple[np.ndarray, ...]]


class Stream(int, enum.Enum):
    TRIPLET = 1
    DOMINATED = 2
    TUPLE = 3
    MONOTONE = 4
    SUBADDITIVE = 5
    CONTINUITY = 6
    POSITIVE_TRIPLET = 7
    POSITIVE_RAY = 8
    OFFSET_RAY = 9
    SPACES = 10


def generator(cfg: SamplerConfig, stream: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed_key, int(stream), chunk])))


def quantize(values: np.ndarray) -> np.ndarray:
    return np.minimum(np.floor(values * _QUANTUM) / _QUANTUM, _CEILING)


def mixture(rng: np.random.Generator, shape: Tuple[int, ...], scale: float) -> np.ndarray:
    """Per coordinate: 0 w.p. 1/4, U[0, scale] w.p. 1/2, Exp(mean scale/4) w.p. 1/4."""
    selector = rng.random(shape)
    uniform = rng.uniform(0.0, scale, shape)
    exponential = rng.exponential(scale / 4.0, shape)
    values = np.where(selector < 0.25, 0.0, np.where(selector < 0.75, uniform, exponential))
    return quantize(values)


def positive_mixture(rng: np.random.Generator, shape: Tuple[int, ...], scale: float) -> np.ndarray:
    """The nonzero branches of :func:`mixture`, floored at one quantum."""
    selector = rng.random(shape)
    uniform = rng.uniform(0.0, scale, shape)
    exponential = rng.exponential(scale / 4.0, shape)
    values = np.where(selector < 2.0 / 3.0, uniform, exponential)
    return np.maximum(quantize(values), 1.0 / _QUANTUM)


def _uniform_between(rng: np.random.Generator, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # lo, hi are dyadic, so (hi - lo) * 2^20 is an exact integer count of quanta
    quanta = np.floor((hi - lo) * _QUANTUM * rng.random(lo.shape))
    return lo + quanta / _QUANTUM


def draw_block(
    cfg: SamplerConfig, stream: int, start: int, count: int, draw: ChunkDraw
) -> Tuple[np.ndarray, ...]:
    """Draws ``start .. start + count - 1`` of a stream, chunk aligned."""
    if count <= 0:
        raise PreconditionError("a block needs at least one draw")
    size = cfg.chunk_size
    pieces: List[Tuple[np.ndarray, ...]] = []
    first, last = start // size, (start + count - 1) // size
    for chunk in range(first, last + 1):
        arrays = draw(generator(cfg, stream, chunk), size)
        lo = max(start, chunk * size) - chunk * size
        hi = min(start + count, (chunk + 1) * size) - chunk * size
        pieces.append(tuple(array[lo:hi] for array in arrays))
    return tuple(np.concatenate(parts, axis=0) for parts in zip(*pieces))


def triplet_draw(arity: int, scale: float) -> ChunkDraw:
    def draw(rng: np.random.Generator, rows: int) -> Tuple[np.ndarray, ...]:
        b = mixture(rng, (rows, arity), scale)
        c = mixture(rng, (rows, arity), scale)
        a = _uniform_between(rng, np.abs(b - c), b + c)
        return a, b, c

    return draw


def dominated_draw(arity: int, scale: float) -> ChunkDraw:
    def draw(rng: np.random.Generator, rows: int) -> Tuple[np.ndarray, ...]:
        b = mixture(rng, (rows, arity), scale)
        c = mixture(rng, (rows, arity), scale)
        a = _uniform_between(rng, np.zeros_like(b), b + c)
        return a, b, c

    return draw


def tuple_draw(arity: int, scale: float, count: int = 1) -> ChunkDraw:
    def draw(rng: np.random.Generator, rows: int) -> Tuple[np.ndarray, ...]:
        return tuple(mixture(rng, (rows, arity), scale) for _ in range(count))

    return draw


def monotone_draw(arity: int, scale: float) -> ChunkDraw:
    def draw(rng: np.random.Generator, rows: int) -> Tuple[np.ndarray, ...]:
        a = mixture(rng, (rows, arity), scale)
        return a, a + mixture(rng, (rows, arity), scale)

    return draw


def positive_triplet_draw(arity: int, scale: float) -> ChunkDraw:
    """Triplets whose tuples are each 0_n or lie in (0, inf)^n."""

    def draw(rng: np.random.Generator, rows: int) -> Tuple[np.ndarray, ...]:
        b = positive_mixture(rng, (rows, arity), scale)
        c = positive_mixture(rng, (rows, arity), scale)
        pattern = rng.random(rows)
        b[pattern < 0.15] = 0.0
        c[(pattern >= 0.15) & (pattern < 0.3)] = 0.0
        lo, hi = np.abs(b - c), b + c
        a = _uniform_between(rng, lo, hi)
        # a coordinate hitting 0 while others stay positive leaves the cone
        partial = (a == 0.0).any(axis=1) & (a > 0.0).any(axis=1)
        a[partial] = hi[partial]
        return a, b, c

    return draw


def is_triangle_triplet(a: NonNegTuple, b: NonNegTuple, c: NonNegTuple) -> bool:
    """Exact componentwise test of a <= b + c, b <= a + c, c <= a + b."""
    if not (a.arity == b.arity == c.arity):
        raise DimensionError(f"arities {a.arity}, {b.arity}, {c.arity} differ")
    return bool(triplet_mask(a.as_array()[None], b.as_array()[None], c.as_array()[None])[0])


def triplet_mask(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((A <= B + C) & (B <= A + C) & (C <= A + B)).all(axis=1)


def _tuple(row: np.ndarray) -> NonNegTuple:
    return NonNegTuple(values=tuple(float(v) for v in row))


def _check_arity(arity: int) -> None:
    if arity < 1:
        raise DimensionError("arity must be >= 1")


def sample_triplet(cfg: SamplerConfig, arity: int, index: int = 0) -> TriangleTriplet:
    """Draw number ``index`` of the triangle-triplet stream."""
    _check_arity(arity)
    a, b, c = draw_block(cfg, Stream.TRIPLET, index, 1, triplet_draw(arity, cfg.scale))
    return TriangleTriplet(a=_tuple(a[0]), b=_tuple(b[0]), c=_tuple(c[0]))


def sample_dominated(
    cfg: SamplerConfig, arity: int, index: int = 0
) -> Tuple[NonNegTuple, NonNegTuple, NonNegTuple]:
    """Draw number ``index`` of the a <= b + c stream."""
    _check_arity(arity)
    a, b, c = draw_block(cfg, Stream.DOMINATED, index, 1, dominated_draw(arity, cfg.scale))
    return _tuple(a[0]), _tuple(b[0]), _tuple(c[0])


def corner_array(levels: Sequence[float], arity: int, cap: int) -> np.ndarray:
    _check_arity(arity)
    size = len(levels) ** arity
    if size > cap:
        raise EnumerationError("corner grid", size, cap)
    grid = np.asarray(list(itertools.product(levels, repeat=arity)), dtype=float)
    return grid.reshape(size, arity)


def corner_stream(cfg: SamplerConfig, arity: int, cap: Optional[int] = None) -> List[NonNegTuple]:
    """The full grid ``grid_levels^arity`` in lexicographic order."""
    grid = corner_array(cfg.grid_levels, arity, cap or cfg.corner_cap)
    return [_tuple(row) for row in grid]


def corner_points(cfg: SamplerConfig, arity: int) -> np.ndarray:
    """Corner grid used by the checkers.

    Falls back to the sparse grid (at most two nonzero coordinates) when the
    full grid is above the cap.
    """
    try:
        return corner_array(cfg.grid_levels, arity, cfg.corner_cap)
    except EnumerationError:
        logger.info("corner grid above cap, using sparse corners", arity=arity, cap=cfg.corner_cap)
    rows = {tuple([0.0] * arity)}
    positive = [level for level in cfg.grid_levels if level > 0]
    for i in range(arity):
        for x in positive:
            row = [0.0] * arity
            row[i] = x
            rows.add(tuple(row))
            for j in range(i + 1, arity):
                for y in positive:
                    pair = list(row)
                    pair[j] = y
                    rows.add(tuple(pair))
    return np.asarray(sorted(rows), dtype=float)


def scan_chunks(
    cfg: SamplerConfig,
    budget: int,
    examine: Callable[[int, int], Optional[Tuple[int, object]]],
) -> Optional[Tuple[int, object]]:
    """Run ``examine(start, count)`` over the budget and return the hit with the
    smallest draw index, or None.

    ``examine`` returns (absolute draw index, payload) for its first hit.
    """
    size = cfg.chunk_size
    blocks = [(start, min(size, budget - start)) for start in range(0, budget, size)]
    if cfg.workers == 1:
        for start, count in blocks:
            hit = examine(start, count)
            if hit is not None:
                return hit
        return None

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for offset in range(0, len(blocks), cfg.workers):
            wave = blocks[offset : offset + cfg.workers]
            hits = [hit for hit in pool.map(lambda block: examine(*block), wave) if hit is not None]
            if hits:
                return min(hits, key=lambda hit: hit[0])
    return None
