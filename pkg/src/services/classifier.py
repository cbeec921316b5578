"""Sampled falsification of the characterizing properties and the class lattice.

Each checker scans the corner grid first and then ``cfg.budget`` seeded draws.
A falsified verdict is conclusive and carries a witness that re-validates
independently; a consistent verdict only means the budget ran out.
"""

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core import get_logger, settings
from src.core.errors import ContractError, EnumerationError, PreconditionError
from src.models import (
    AggregatorKind,
    AggregatorSpec,
    AuxiliaryCheck,
    ClassificationReport,
    ClassVerdict,
    Membership,
    PropertyKind,
    SamplerConfig,
    Tolerances,
    TriangleTriplet,
    Verdict,
    VerdictStatus,
)
from src.services import sampling
from src.services.aggregators import TupleLike, as_row, evaluate, evaluate_batch, series_tail_bound
from src.services.sampling import Stream

logger = get_logger(__name__)

CLASS_FAMILIES = ("QPM", "QM", "PM", "M")
MODES = ("products", "sets")
STRENGTHS = ("plain", "strongly")

V = PropertyKind.VANISHES_AT_ZERO
Z = PropertyKind.ZERO_PREIMAGE_TRIVIAL
MON = PropertyKind.MONOTONE
S = PropertyKind.SUBADDITIVE
T = PropertyKind.TRIPLET_PRESERVING
A = PropertyKind.ASYMMETRIC_TRIPLET
C = PropertyKind.CONTINUOUS_AT_ZERO

TUPLE_KEYS: Dict[PropertyKind, Tuple[str, ...]] = {
    Z: ("a",),
    MON: ("a", "b"),
    S: ("a", "b"),
    T: ("a", "b", "c"),
    A: ("a", "b", "c"),
}

# examine(start, count) -> (draw index, witness rows) for the first hit, or None
Examiner = Callable[[int, int], Optional[Tuple[int, List[np.ndarray]]]]


def class_name(family: str, mode: str, strength: str) -> str:
    return f"{family}-agg/{mode}/{strength}"


def _arity(F: AggregatorSpec) -> int:
    arity = F.arity if F.arity is not None else F.fixed_arity()
    if arity is None:
        raise PreconditionError(f"{F.label} is variadic; bind an arity before checking it")
    return arity


def _tol(tol: Optional[Tolerances]) -> Tolerances:
    return tol if tol is not None else settings.tolerances()


def _cfg(cfg: Optional[SamplerConfig]) -> SamplerConfig:
    return cfg if cfg is not None else settings.sampler_config()


def _listed(row: np.ndarray) -> List[float]:
    return [float(v) for v in row]


def _roundness_order(rows: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Sort by fewest non-integer entries, smallest max entry, fewest nonzero
    entries, then position."""
    fractional = (rows != np.floor(rows)).sum(axis=1)
    return np.lexsort((positions, (rows > 0).sum(axis=1), rows.max(axis=1), fractional))


def _roundest(rows: np.ndarray, mask: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(mask)
    if hits.size == 0:
        return None
    return int(hits[_roundness_order(rows[hits], hits)[0]])


def _pool(corners: np.ndarray, size: int) -> np.ndarray:
    """The ``size`` roundest corners, kept in grid order."""
    if corners.shape[0] <= size:
        return corners
    order = _roundness_order(corners, np.arange(corners.shape[0]))
    return corners[np.sort(order[:size])]


def _pairs(corners: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = corners.shape[1]
    pool = _pool(corners, max(1, math.isqrt(settings.corner_pair_cap // n)))
    size = pool.shape[0]
    return np.repeat(pool, size, axis=0), np.tile(pool, (size, 1))


def _triples(corners: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = corners.shape[1]
    limit = max(1, settings.corner_pair_cap // n)
    side = max(1, int(round(limit ** (1.0 / 3.0))))
    while side > 1 and side**3 > limit:
        side -= 1
    pool = _pool(corners, side)
    size = pool.shape[0]
    i, j, k = np.meshgrid(np.arange(size), np.arange(size), np.arange(size), indexing="ij")
    return pool[i.ravel()], pool[j.ravel()], pool[k.ravel()]


def _falsified(
    check: str,
    cfg: SamplerConfig,
    witness: dict,
    used: int,
    corners: int,
    budget: Optional[int] = None,
    note: Optional[str] = None,
) -> Verdict:
    return Verdict(
        check=check,
        status=VerdictStatus.FALSIFIED,
        witness=witness,
        samples_used=used,
        budget=budget or cfg.budget,
        corners_checked=corners,
        seed=cfg.seed,
        note=note,
    )


def _consistent(check: str, cfg: SamplerConfig, corners: int, budget: Optional[int] = None) -> Verdict:
    budget = budget or cfg.budget
    return Verdict(
        check=check,
        status=VerdictStatus.CONSISTENT,
        samples_used=budget,
        budget=budget,
        corners_checked=corners,
        seed=cfg.seed,
    )


def _log(verdict: Verdict) -> Verdict:
    logger.info(
        "checker finished",
        property=verdict.check,
        status=verdict.status.value,
        samples=verdict.samples_used,
        corners=verdict.corners_checked,
    )
    return verdict


# Violation predicates, shared by checkers, the shrinker and re-validation


def _zero_preimage_mask(F, X, tol: Tolerances) -> np.ndarray:
    return (X.max(axis=1) > tol.tol_zero) & (evaluate_batch(F, X) <= tol.tol_zero)


def _monotone_mask(F, X, Y, tol: Tolerances) -> np.ndarray:
    ordered = (X <= Y).all(axis=1)
    return ordered & (evaluate_batch(F, X) > evaluate_batch(F, Y) + tol.tol_cmp)


def _subadditive_mask(F, X, Y, tol: Tolerances) -> np.ndarray:
    return evaluate_batch(F, X + Y) > evaluate_batch(F, X) + evaluate_batch(F, Y) + tol.tol_cmp


def _broken_side(fa, fb, fc, tol: Tolerances) -> np.ndarray:
    """Which value breaks the scalar triangle: 0, 1, 2, or -1 for none."""
    broken = np.stack(
        [fa > fb + fc + tol.tol_cmp, fb > fa + fc + tol.tol_cmp, fc > fa + fb + tol.tol_cmp],
        axis=1,
    )
    return np.where(broken.any(axis=1), broken.argmax(axis=1), -1)


def _triplet_mask(F, X, Y, W, tol: Tolerances) -> np.ndarray:
    valid = sampling.triplet_mask(X, Y, W)
    sides = _broken_side(evaluate_batch(F, X), evaluate_batch(F, Y), evaluate_batch(F, W), tol)
    return valid & (sides >= 0)


def _asymmetric_mask(F, X, Y, W, tol: Tolerances) -> np.ndarray:
    dominated = (X <= Y + W).all(axis=1)
    return dominated & (
        evaluate_batch(F, X) > evaluate_batch(F, Y) + evaluate_batch(F, W) + tol.tol_cmp
    )


_MASKS = {
    Z: _zero_preimage_mask,
    MON: _monotone_mask,
    S: _subadditive_mask,
    T: _triplet_mask,
    A: _asymmetric_mask,
}


def _violates(F: AggregatorSpec, kind: PropertyKind, rows: Sequence[np.ndarray], tol: Tolerances) -> bool:
    return bool(_MASKS[kind](F, *(row[None, :] for row in rows), tol)[0])


def _witness(F: AggregatorSpec, kind: PropertyKind, rows: Sequence[np.ndarray]) -> dict:
    keys = TUPLE_KEYS[kind]
    witness: dict = {key: _listed(row) for key, row in zip(keys, rows)}
    for key, row in zip(keys, rows):
        witness[f"F({key})"] = evaluate(F, row)
    if kind == S:
        witness["F(a+b)"] = evaluate(F, rows[0] + rows[1])
    return witness


def _rows(witness: dict, kind: PropertyKind) -> List[np.ndarray]:
    try:
        return [as_row(witness[key]).copy() for key in TUPLE_KEYS[kind]]
    except KeyError as exc:
        raise ContractError(f"{kind.value} witness is missing {exc.args[0]!r}") from exc


def _normalize_triplet(F: AggregatorSpec, rows: Sequence[np.ndarray], tol: Tolerances) -> List[np.ndarray]:
    """Rotate a triangle triplet so the broken inequality reads F(a) > F(b) + F(c)."""
    values = [np.array([evaluate(F, row)]) for row in rows]
    broken = int(_broken_side(*values, tol)[0])
    if broken <= 0:
        return list(rows)
    return [rows[broken], *(row for i, row in enumerate(rows) if i != broken)]


# Checkers


def check_vanishes_at_zero(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """F(0_n) <= tol_zero, decided by a single evaluation."""
    cfg, tol = _cfg(cfg), _tol(tol)
    zero = np.zeros(_arity(F))
    value = evaluate(F, zero)
    if value > tol.tol_zero:
        witness = {"a": _listed(zero), "F(a)": value}
        return _log(_falsified(V.value, cfg, witness, 1, 0, budget=1))
    return _log(_consistent(V.value, cfg, 0, budget=1))


def _first_hit(mask: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(mask)
    return None if hits.size == 0 else int(hits[0])


def _run(
    F: AggregatorSpec,
    kind: PropertyKind,
    cfg: SamplerConfig,
    tol: Tolerances,
    corner_rows: Sequence[np.ndarray],
    stream: Stream,
    draw: sampling.ChunkDraw,
) -> Verdict:
    """Corner grid first, then the seeded draws of ``stream``."""
    mask = _MASKS[kind](F, *corner_rows, tol)
    corners = int(corner_rows[0].shape[0])
    hit = _roundest(np.hstack(corner_rows), mask)
    if hit is not None:
        rows = [block[hit] for block in corner_rows]
        if kind == T:
            rows = _normalize_triplet(F, rows, tol)
        return _log(_falsified(kind.value, cfg, _witness(F, kind, rows), 0, corners))

    def examine(start: int, count: int):
        blocks = sampling.draw_block(cfg, stream, start, count, draw)
        found = _first_hit(_MASKS[kind](F, *blocks, tol))
        if found is None:
            return None
        rows = [block[found] for block in blocks]
        if kind == T:
            rows = _normalize_triplet(F, rows, tol)
        return start + found, rows

    hit = sampling.scan_chunks(cfg, cfg.budget, examine)
    if hit is None:
        return _log(_consistent(kind.value, cfg, corners))
    index, rows = hit
    return _log(_falsified(kind.value, cfg, _witness(F, kind, rows), index + 1, corners))


def check_zero_preimage(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Search for a nonzero a with F(a) <= tol_zero; fails too when F(0) > 0.

    Candidates need some entry above tol_zero, so grid levels at the
    tolerance cannot produce a spurious witness.
    """
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    vanish = check_vanishes_at_zero(F, cfg, tol)
    if vanish.falsified:
        witness = {**vanish.witness, "reason": "F(0) > 0, so 0 is not in the zero preimage"}
        return _log(_falsified(Z.value, cfg, witness, 0, 0))
    corners = sampling.corner_points(cfg, n)
    return _run(F, Z, cfg, tol, [corners], Stream.TUPLE, sampling.tuple_draw(n, cfg.scale))


def check_monotone(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Search for a <= b with F(a) > F(b) + tol_cmp."""
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    pairs = _pairs(sampling.corner_points(cfg, n))
    return _run(F, MON, cfg, tol, pairs, Stream.MONOTONE, sampling.monotone_draw(n, cfg.scale))


def check_subadditive(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Search for a, b with F(a + b) > F(a) + F(b) + tol_cmp."""
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    pairs = _pairs(sampling.corner_points(cfg, n))
    draw = sampling.tuple_draw(n, cfg.scale, count=2)
    return _run(F, S, cfg, tol, pairs, Stream.SUBADDITIVE, draw)


def check_triplet_preservation(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Search for a triangle triplet whose image (F(a), F(b), F(c)) is not one.

    Witnesses are rotated so that F(a) > F(b) + F(c) is the broken inequality.
    """
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    triples = _triples(sampling.corner_points(cfg, n))
    return _run(F, T, cfg, tol, triples, Stream.TRIPLET, sampling.triplet_draw(n, cfg.scale))


def check_asymmetric_triplet(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Search for a <= b + c with F(a) > F(b) + F(c) + tol_cmp."""
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    triples = _triples(sampling.corner_points(cfg, n))
    return _run(F, A, cfg, tol, triples, Stream.DOMINATED, sampling.dominated_draw(n, cfg.scale))


def _level_counts(budget: int, levels: int) -> List[int]:
    base, extra = divmod(budget, levels)
    return [base + (1 if j < extra else 0) for j in range(levels)]


def continuity_profile(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> List[Tuple[float, float, List[float]]]:
    """(delta, m(delta), argmax) for delta = scale * 2^-j, j = 0..J.

    m(delta) is the max of F over the corners below delta and the samples
    drawn from [0, delta)^n. The first sample of each level is the box
    center (delta/2, ..., delta/2).
    """
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    depth = tol.continuity_depth
    profile = []
    for j, count in enumerate(_level_counts(cfg.budget, depth + 1)):
        delta = cfg.scale * 2.0**-j
        below = tuple(level for level in cfg.grid_levels if level < delta)
        boxes = [sampling.corner_points(cfg.model_copy(update={"grid_levels": below}), n)]
        if count > 0:
            boxes.append(np.full((1, n), delta / 2.0))
        if count > 1:
            rng = sampling.generator(cfg, Stream.CONTINUITY, j)
            boxes.append(rng.uniform(0.0, delta, (count - 1, n)))
        points = np.vstack(boxes)
        values = evaluate_batch(F, points)
        best = int(values.argmax())
        profile.append((delta, float(values[best]), _listed(points[best])))
    return profile


def check_continuity_at_zero(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Falsified iff m(delta_min) > tol_cont, with witness (delta_min, a*)."""
    cfg, tol = _cfg(cfg), _tol(tol)
    delta, peak, argmax = continuity_profile(F, cfg, tol)[-1]
    if peak > tol.tol_cont:
        witness = {"delta": delta, "a": argmax, "F(a)": peak}
        return _log(_falsified(C.value, cfg, witness, cfg.budget, 0))
    return _log(_consistent(C.value, cfg, 0))


# Auxiliary checks for the set-mode metric classes


def _cone_corners(cfg: SamplerConfig, n: int) -> np.ndarray:
    positive = [level for level in cfg.grid_levels if level > 0]
    try:
        cone = sampling.corner_array(positive, n, cfg.corner_cap)
    except EnumerationError:
        cone = np.outer(positive, np.ones(n))
    return np.vstack([np.zeros((1, n)), cone])


def check_positive_cone_triplet(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """Triplet preservation restricted to {0_n} u (0, inf)^n.

    Metric families only produce distance tuples in that set, so F(0) = 0,
    F > 0 on the open cone and this restricted preservation are enough for
    metric aggregation on sets.
    """
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    check = AuxiliaryCheck.POSITIVE_CONE_TRIPLET.value
    vanish = check_vanishes_at_zero(F, cfg, tol)
    if vanish.falsified:
        return _log(_falsified(check, cfg, {**vanish.witness, "reason": "F(0) > 0"}, 0, 0))

    corners = _cone_corners(cfg, n)
    flat = _roundest(corners, _zero_preimage_mask(F, corners, tol))
    if flat is not None:
        witness = {
            "a": _listed(corners[flat]),
            "F(a)": evaluate(F, corners[flat]),
            "reason": "F vanishes on the open cone",
        }
        return _log(_falsified(check, cfg, witness, 0, corners.shape[0]))

    triples = _triples(corners)
    total = corners.shape[0] + triples[0].shape[0]
    hit = _roundest(np.hstack(triples), _triplet_mask(F, *triples, tol))
    if hit is not None:
        rows = _normalize_triplet(F, [block[hit] for block in triples], tol)
        return _log(_falsified(check, cfg, _witness(F, T, rows), 0, total))

    draw = sampling.positive_triplet_draw(n, cfg.scale)

    def examine(start: int, count: int):
        P, Q, R = sampling.draw_block(cfg, Stream.POSITIVE_TRIPLET, start, count, draw)
        vanishing = _zero_preimage_mask(F, np.vstack([P, Q, R]), tol).reshape(3, -1)
        broken = _triplet_mask(F, P, Q, R, tol) | vanishing.any(axis=0)
        found = _first_hit(broken)
        if found is None:
            return None
        for rows, flags in ((P, vanishing[0]), (Q, vanishing[1]), (R, vanishing[2])):
            if flags[found]:
                row = rows[found]
                return start + found, {"a": _listed(row), "F(a)": evaluate(F, row), "reason": "F vanishes on the open cone"}
        rows = _normalize_triplet(F, [P[found], Q[found], R[found]], tol)
        return start + found, _witness(F, T, rows)

    hit = sampling.scan_chunks(cfg, cfg.budget, examine)
    if hit is None:
        return _log(_consistent(check, cfg, total))
    index, witness = hit
    return _log(_falsified(check, cfg, witness, index + 1, total))


def check_positive_ray_continuity(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """F(t * w) must fall below tol_cont at t = 2^-J along positive rays w.

    Scaled Euclidean families realize every positive ray as an image, so a
    failure here rules out strongly metric aggregation on sets. The first
    direction is the diagonal.
    """
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    check = AuxiliaryCheck.POSITIVE_RAY_CONTINUITY.value
    t = 2.0**-tol.continuity_depth

    def draw(rng: np.random.Generator, rows: int):
        return (sampling.positive_mixture(rng, (rows, n), cfg.scale),)

    def examine(start: int, count: int):
        (W,) = sampling.draw_block(cfg, Stream.POSITIVE_RAY, start, count, draw)
        if start == 0:
            W[0] = 1.0
        found = _first_hit(evaluate_batch(F, t * W) > tol.tol_cont)
        return None if found is None else (start + found, W[found])

    hit = sampling.scan_chunks(cfg, cfg.budget, examine)
    if hit is None:
        return _log(_consistent(check, cfg, 0))
    index, direction = hit
    a = t * direction
    witness = {"direction": _listed(direction), "t": t, "a": _listed(a), "F(a)": evaluate(F, a)}
    return _log(_falsified(check, cfg, witness, index + 1, 0))


def check_offset_ray_collapse(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> Verdict:
    """F(c * e_i + t * w) must stay above tol_cont as t -> 0, for c > 0.

    A c-scaled discrete metric on coordinate i next to scaled Euclidean
    metrics realizes the curve t -> c * e_i + t * w (w zero on i) as an image.
    If F collapses along it, the aggregated topology is strictly coarser than
    the discrete supremum topology. Draw k uses coordinate k mod n; the first
    n draws use c = 1 and w = 1.
    """
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    check = AuxiliaryCheck.OFFSET_RAY_COLLAPSE.value
    t = 2.0**-tol.continuity_depth

    def draw(rng: np.random.Generator, rows: int):
        return (
            sampling.positive_mixture(rng, (rows, 1), cfg.scale),
            sampling.positive_mixture(rng, (rows, n), cfg.scale),
        )

    def examine(start: int, count: int):
        offsets, W = sampling.draw_block(cfg, Stream.OFFSET_RAY, start, count, draw)
        index = np.arange(start, start + count)
        first = index < n
        offsets[first] = 1.0
        W[first] = 1.0
        axis = np.zeros((count, n), dtype=bool)
        axis[np.arange(count), index % n] = True
        points = np.where(axis, offsets, t * W)
        found = _first_hit(evaluate_batch(F, points) <= tol.tol_cont)
        return None if found is None else (start + found, (points[found], W[found], int(index[found] % n)))

    hit = sampling.scan_chunks(cfg, cfg.budget, examine)
    if hit is None:
        return _log(_consistent(check, cfg, 0))
    index, (point, direction, axis) = hit
    direction = direction.copy()
    direction[axis] = 0.0
    witness = {
        "coordinate": axis + 1,
        "offset": float(point[axis]),
        "direction": _listed(direction),
        "t": t,
        "a": _listed(point),
        "F(a)": evaluate(F, point),
    }
    return _log(_falsified(check, cfg, witness, index + 1, 0))


# Witness handling


def _shrink_candidates(x: float) -> List[float]:
    candidates = [0.0]
    if x >= 1.0:
        candidates.append(1.0)
    if x > 0:
        candidates.append(2.0 ** math.floor(math.log2(x)))
    candidates.append(float(math.floor(x)))
    ordered: List[float] = []
    for value in candidates:
        if value < x and value not in ordered:
            ordered.append(value)
    return ordered


def witness_falsifies(
    F: AggregatorSpec, kind: PropertyKind, witness: dict, tol: Optional[Tolerances] = None
) -> bool:
    """Re-evaluate a witness independently of the checker that produced it."""
    tol = _tol(tol)
    if kind == V or (kind == Z and "reason" in witness):
        return evaluate(F, witness["a"]) > tol.tol_zero
    if kind == C:
        a = as_row(witness["a"])
        return bool((a < witness["delta"]).all()) and evaluate(F, a) > tol.tol_cont
    return _violates(F, kind, _rows(witness, kind), tol)


def shrink_witness(
    F: AggregatorSpec, kind: PropertyKind, witness: dict, tol: Optional[Tolerances] = None
) -> dict:
    """Move witness entries toward 0 and rounder values while it still falsifies.

    Tries 0, 1, the largest power of two and the floor for every entry and
    repeats until nothing changes. Every entry of the result is <= the input.
    """
    tol = _tol(tol)
    if not witness_falsifies(F, kind, witness, tol):
        raise ContractError(f"the {kind.value} witness does not falsify {F.label}")
    if kind not in TUPLE_KEYS or "reason" in witness:
        return witness

    rows = _rows(witness, kind)
    changed = True
    while changed:
        changed = False
        for r in range(len(rows)):
            for i in range(rows[r].size):
                for candidate in _shrink_candidates(float(rows[r][i])):
                    trial = [row.copy() for row in rows]
                    trial[r][i] = candidate
                    if _violates(F, kind, trial, tol):
                        rows = trial
                        changed = True
                        break
    if kind == T:
        rows = _normalize_triplet(F, rows, tol)
    shrunk = _witness(F, kind, rows)
    if shrunk != witness:
        logger.debug("witness shrunk", property=kind.value, before=witness, after=shrunk)
    return shrunk


def propagate_triplet_witness(
    F: AggregatorSpec,
    t: Union[TriangleTriplet, Sequence[TupleLike]],
    tol: Optional[Tolerances] = None,
) -> Tuple[PropertyKind, dict]:
    """Split F(a) > F(b) + F(c) with a <= b + c into a Monotone or Subadditive witness.

    With s = b + c: F(a) > F(s) gives the monotone witness (a, s), otherwise
    F(s) > F(b) + F(c) gives the subadditive witness (b, c). The margin is
    2 * tol_cmp so the chosen branch violates by more than tol_cmp.
    """
    tol = _tol(tol)
    if isinstance(t, TriangleTriplet):
        a, b, c = t.a.as_array(), t.b.as_array(), t.c.as_array()
    else:
        a, b, c = (as_row(item) for item in t)
    s = b + c
    fa, fb, fc = evaluate(F, a), evaluate(F, b), evaluate(F, c)
    if not ((a <= s).all() and fa > fb + fc + 2 * tol.tol_cmp):
        raise ContractError("propagation needs a <= b + c and F(a) > F(b) + F(c) + 2 * tol_cmp")
    fs = evaluate(F, s)
    if fa > fs + tol.tol_cmp:
        return MON, _witness(F, MON, [a, s])
    if fs > fb + fc + tol.tol_cmp:
        return S, _witness(F, S, [b, c])
    raise ContractError("neither the monotone nor the subadditive branch is violated")


# Classification

_PLAIN = {
    "QPM": (V, S, MON),
    "QM": (Z, S, MON),
    "PM": (V, T),
    "M": (Z, T),
}
_STRONG = {
    "QPM": (Z, S, MON, C),
    "QM": (Z, S, MON, C),
    "PM": (Z, T, C),
    "M": (Z, T, C),
}


def _from_requirements(
    requires: Sequence[PropertyKind], verdicts: Dict[PropertyKind, Verdict]
) -> ClassVerdict:
    failed = [kind.value for kind in requires if verdicts[kind].falsified]
    return ClassVerdict(
        membership=Membership.EXCLUDED if failed else Membership.CONSISTENT_WITH,
        requires=[kind.value for kind in requires],
        excluded_by=failed,
    )


def _metric_on_sets(
    classes: Dict[str, ClassVerdict], verdicts: Dict[PropertyKind, Verdict], cone: Verdict
) -> ClassVerdict:
    if classes[class_name("M", "products", "plain")].membership == Membership.CONSISTENT_WITH:
        return ClassVerdict(
            membership=Membership.CONSISTENT_WITH,
            requires=[Z.value, T.value],
            note="metric aggregation on products implies it on sets",
        )
    if cone.consistent:
        return ClassVerdict(
            membership=Membership.CONSISTENT_WITH,
            requires=[cone.check],
            note="triplets from {0} u (0, inf)^n are preserved, the only values metric families produce",
        )
    if verdicts[V].falsified:
        return ClassVerdict(membership=Membership.EXCLUDED, requires=[V.value], excluded_by=[V.value])
    return ClassVerdict(
        membership=Membership.UNDETERMINED,
        requires=[cone.check],
        note="the sufficient routes failed and the checked properties do not decide this class",
    )


def _strongly_metric_on_sets(
    classes: Dict[str, ClassVerdict],
    verdicts: Dict[PropertyKind, Verdict],
    necessary: Sequence[Verdict],
) -> ClassVerdict:
    products = classes[class_name("M", "products", "strongly")]
    if products.membership == Membership.CONSISTENT_WITH:
        return ClassVerdict(
            membership=Membership.CONSISTENT_WITH,
            requires=list(products.requires),
            note="strongly metric on products implies strongly metric on sets",
        )
    checks = [verdicts[V], *necessary]
    failed = [verdict.check for verdict in checks if verdict.falsified]
    if failed:
        return ClassVerdict(
            membership=Membership.EXCLUDED,
            requires=[verdict.check for verdict in checks],
            excluded_by=failed,
        )
    return ClassVerdict(
        membership=Membership.UNDETERMINED,
        requires=list(products.requires),
        note="not fully decidable here: it is open whether strongly metric aggregation "
        "on sets coincides with the products notion",
    )


def derive_classes(
    verdicts: Dict[PropertyKind, Verdict], auxiliary: Dict[AuxiliaryCheck, Verdict]
) -> Dict[str, ClassVerdict]:
    """Class memberships as a pure function of the verdicts."""
    classes: Dict[str, ClassVerdict] = {}
    for family in CLASS_FAMILIES:
        for mode in MODES:
            if family == "M" and mode == "sets":
                continue
            classes[class_name(family, mode, "plain")] = _from_requirements(_PLAIN[family], verdicts)
            classes[class_name(family, mode, "strongly")] = _from_requirements(_STRONG[family], verdicts)

    classes[class_name("M", "sets", "plain")] = _metric_on_sets(
        classes, verdicts, auxiliary[AuxiliaryCheck.POSITIVE_CONE_TRIPLET]
    )
    classes[class_name("M", "sets", "strongly")] = _strongly_metric_on_sets(
        classes,
        verdicts,
        [
            auxiliary[AuxiliaryCheck.POSITIVE_RAY_CONTINUITY],
            auxiliary[AuxiliaryCheck.OFFSET_RAY_COLLAPSE],
        ],
    )
    return dict(sorted(classes.items()))


def _propagate_into(
    F: AggregatorSpec,
    source: Verdict,
    verdicts: Dict[PropertyKind, Verdict],
    cfg: SamplerConfig,
    tol: Tolerances,
) -> None:
    try:
        kind, witness = propagate_triplet_witness(F, _rows(source.witness, T), tol)
    except ContractError as exc:
        logger.warning("triplet witness not propagated", source=source.check, reason=str(exc))
        return
    verdicts[kind] = _falsified(
        kind.value,
        cfg,
        witness,
        source.samples_used,
        source.corners_checked,
        note=f"derived from the {source.check} witness",
    )


def classify(
    F: AggregatorSpec, cfg: Optional[SamplerConfig] = None, tol: Optional[Tolerances] = None
) -> ClassificationReport:
    """Run every checker and derive the class lattice."""
    cfg, tol = _cfg(cfg), _tol(tol)
    n = _arity(F)
    F = F.bind(n)
    logger.info("classifying", aggregator=F.label, arity=n, seed=cfg.seed, budget=cfg.budget)

    verdicts = {kind: checker(F, cfg, tol) for kind, checker in CHECKERS.items()}
    for kind in TUPLE_KEYS:
        verdict = verdicts[kind]
        if verdict.falsified and "reason" not in verdict.witness:
            shrunk = shrink_witness(F, kind, verdict.witness, tol)
            verdicts[kind] = verdict.model_copy(update={"witness": shrunk})

    # a triplet failure has to show up in monotonicity or subadditivity
    for source in (T, A):
        if verdicts[source].falsified and verdicts[MON].consistent and verdicts[S].consistent:
            _propagate_into(F, verdicts[source], verdicts, cfg, tol)

    auxiliary = {
        AuxiliaryCheck.POSITIVE_CONE_TRIPLET: check_positive_cone_triplet(F, cfg, tol),
        AuxiliaryCheck.POSITIVE_RAY_CONTINUITY: check_positive_ray_continuity(F, cfg, tol),
        AuxiliaryCheck.OFFSET_RAY_COLLAPSE: check_offset_ray_collapse(F, cfg, tol),
    }
    tail = series_tail_bound(F.truncation) if F.kind == AggregatorKind.SERIES else None
    return ClassificationReport(
        aggregator=F.label,
        arity=n,
        verdicts=verdicts,
        auxiliary=auxiliary,
        classes=derive_classes(verdicts, auxiliary),
        series_tail_bound=tail,
    )


CHECKERS: Dict[PropertyKind, Callable[..., Verdict]] = {
    V: check_vanishes_at_zero,
    Z: check_zero_preimage,
    MON: check_monotone,
    S: check_subadditive,
    T: check_triplet_preservation,
    A: check_asymmetric_triplet,
    C: check_continuity_at_zero,
}
