"""Convergence and semicontinuity probes on countable spaces.

Finite spaces only carry Alexandrov topologies, so continuity at 0 and upper
semicontinuity of restricted preimages are probed on null sequences and on
images described by isolated points plus sampled rays.
"""

import math
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from src.core import get_logger, settings
from src.core.errors import DimensionError, PreconditionError, UnknownPointError
from src.models import (
    AggregatorSpec,
    ConvergenceMode,
    ConvergenceVerdict,
    ProbeSequence,
    Ray,
    SamplerConfig,
    SequenceSpace,
    SequenceVariant,
    StructuredImage,
    Tolerances,
    Verdict,
    VerdictStatus,
)
from src.services.aggregators import evaluate_batch, resolve_arity
from src.services.classifier import check_vanishes_at_zero

logger = get_logger(__name__)

MIN_SEQUENCE_LENGTH = 100
DEFAULT_RADIUS_GRID = (0.5, 0.25, 0.1)
DEFAULT_DELTA_GRID = tuple(2.0**-j for j in range(1, 31))


def tail_protocol(
    values: np.ndarray,
    tau: Optional[float] = None,
    fraction: Optional[float] = None,
    decay: Optional[float] = None,
) -> Optional[int]:
    """Index of the first tail term that breaks convergence to 0, or None.

    A term of the last ``fraction`` of the sequence is fine when it is below
    ``tau``, or when the tail is shrinking (non-increasing, last term below
    its first) and the term is at most ``decay`` times the largest term of
    the first ``fraction``.
    """
    tau = settings.tail_tau if tau is None else tau
    fraction = settings.tail_fraction if fraction is None else fraction
    decay = settings.tail_decay if decay is None else decay
    values = np.asarray(values, dtype=float)
    size = values.shape[0]
    window = max(1, math.ceil(fraction * size))
    head_peak = float(values[:window].max())
    tail = values[size - window :]
    shrinking = bool((np.diff(tail) <= 0).all() and tail[-1] < tail[0])
    decayed = (tail <= decay * head_peak) if shrinking else np.zeros(window, dtype=bool)
    bad = np.flatnonzero((tail >= tau) & ~decayed)
    return None if bad.size == 0 else int(size - window + bad[0])


def null_sequence_family(
    arity: int, K: Optional[int] = None, variant: SequenceVariant = SequenceVariant.EUCLIDEAN
) -> List[SequenceSpace]:
    if arity < 1:
        raise DimensionError("a family needs at least one member")
    K = K or settings.null_sequence_depth
    return [SequenceSpace(K=K, variant=variant) for _ in range(arity)]


def default_sequences(arity: int, K: Optional[int] = None) -> List[ProbeSequence]:
    """Sequences converging to 0_n in the product topology.

    The diagonal (1/k, ..., 1/k), one sequence per axis and the constant
    sequence at the limit.
    """
    K = K or settings.null_sequence_depth
    steps = [1.0 / k for k in range(1, K + 1)]
    zero = tuple([0.0] * arity)
    sequences = [ProbeSequence(name="diagonal", terms=[(s,) * arity for s in steps], limit=zero)]
    if arity > 1:
        for i in range(arity):
            terms = [tuple(s if j == i else 0.0 for j in range(arity)) for s in steps]
            sequences.append(ProbeSequence(name=f"axis-{i + 1}", terms=terms, limit=zero))
    sequences.append(ProbeSequence(name="constant", terms=[zero] * K, limit=zero))
    return sequences


def _check_points(space: SequenceSpace, column: np.ndarray) -> None:
    # points of a null sequence space are 0 and 1/k for k <= K
    positive = column[column != 0.0]
    k = np.rint(1.0 / positive) if positive.size else positive
    off = (positive < 0) | (k < 1) | (k > space.K) | ~np.isclose(positive * k, 1.0, rtol=1e-12, atol=0.0)
    if off.any():
        raise UnknownPointError(f"{float(positive[off][0])!r} is not a point of the null sequence space K={space.K}")


def member_distances(spaces: Sequence[SequenceSpace], seq: ProbeSequence) -> np.ndarray:
    """(len(seq), n) array of d_i(limit_i, term_i)."""
    if not seq.terms:
        raise PreconditionError(f"sequence {seq.name} is empty")
    n = len(spaces)
    terms = np.asarray(seq.terms, dtype=float)
    limit = np.asarray(seq.limit, dtype=float)
    if terms.ndim != 2:
        raise DimensionError(f"sequence {seq.name} mixes arities")
    # a single coordinate is one point of a common set in sets mode
    if terms.shape[1] == 1 and n > 1:
        terms = np.repeat(terms, n, axis=1)
        limit = np.repeat(limit, n)
    if terms.shape[1] != n or limit.shape != (n,):
        raise DimensionError(f"sequence {seq.name} has arity {terms.shape[1]}, the family has {n} members")

    D = np.empty_like(terms)
    for i, space in enumerate(spaces):
        _check_points(space, terms[:, i])
        _check_points(space, limit[i : i + 1])
        delta = terms[:, i] - limit[i]
        if space.variant == SequenceVariant.UPPER:
            D[:, i] = np.maximum(delta, 0.0)
        elif space.variant == SequenceVariant.LOWER:
            D[:, i] = np.maximum(-delta, 0.0)
        else:
            D[:, i] = np.abs(delta)
    return D


def converges(
    spaces: Sequence[SequenceSpace],
    seq: ProbeSequence,
    mode: ConvergenceMode,
    F: Optional[AggregatorSpec] = None,
    tau: Optional[float] = None,
    fraction: Optional[float] = None,
    decay: Optional[float] = None,
) -> ConvergenceVerdict:
    """Convergence of ``seq`` to its limit through left balls B(limit, eps)."""
    tau = settings.tail_tau if tau is None else tau
    fraction = settings.tail_fraction if fraction is None else fraction
    decay = settings.tail_decay if decay is None else decay
    D = member_distances(spaces, seq)
    if D.shape[0] < MIN_SEQUENCE_LENGTH:
        raise PreconditionError(
            f"sequence {seq.name} has {D.shape[0]} terms, the tail protocol needs {MIN_SEQUENCE_LENGTH}"
        )

    if mode == ConvergenceMode.AGGREGATED:
        if F is None:
            raise PreconditionError("aggregated convergence needs an aggregation function")
        hits = [tail_protocol(evaluate_batch(F.bind(D.shape[1]), D), tau, fraction, decay)]
    else:
        hits = [tail_protocol(D[:, i], tau, fraction, decay) for i in range(D.shape[1])]
    found = [hit for hit in hits if hit is not None]
    return ConvergenceVerdict(
        mode=mode,
        converges=not found,
        epsilon_witness=(tau, min(found)) if found else None,
        tau=tau,
        tail_fraction=fraction,
        tail_decay=decay,
    )


def probe_sequences(
    F: AggregatorSpec,
    spaces: Sequence[SequenceSpace],
    sequences: Sequence[ProbeSequence],
    mode: ConvergenceMode = ConvergenceMode.PRODUCT_TOPOLOGY,
) -> List[Dict[str, Any]]:
    """Reference and aggregated convergence verdicts, one entry per sequence."""
    F = F.bind(len(spaces))
    rows = []
    for seq in sequences:
        reference = converges(spaces, seq, mode, F)
        aggregated = converges(spaces, seq, ConvergenceMode.AGGREGATED, F)
        rows.append({"sequence": seq.name, "reference": reference, "aggregated": aggregated})
    return rows


def strongness_probe(
    F: AggregatorSpec,
    spaces: Sequence[SequenceSpace],
    sequences: Optional[Sequence[ProbeSequence]] = None,
    mode: ConvergenceMode = ConvergenceMode.PRODUCT_TOPOLOGY,
    cfg: Optional[SamplerConfig] = None,
    tol: Optional[Tolerances] = None,
) -> Verdict:
    """Falsified when some sequence converges in one topology but not the other."""
    cfg = cfg or settings.sampler_config()
    F = F.bind(len(spaces))
    if check_vanishes_at_zero(F, cfg, tol).falsified:
        raise PreconditionError(f"{F.label} does not vanish at 0, so it aggregates nothing")
    K = min(space.K for space in spaces)
    sequences = list(sequences) if sequences is not None else default_sequences(len(spaces), K)
    if not sequences:
        raise PreconditionError("the probe needs at least one sequence")

    check = "strongness_probe"
    for index, row in enumerate(probe_sequences(F, spaces, sequences, mode)):
        reference, aggregated = row["reference"], row["aggregated"]
        if reference.converges != aggregated.converges:
            failing = aggregated if reference.converges else reference
            witness = {
                "sequence": row["sequence"],
                mode.value: reference.converges,
                "aggregated": aggregated.converges,
                "epsilon": failing.epsilon_witness[0],
                "index": failing.epsilon_witness[1],
            }
            logger.info("strongness probe falsified", aggregator=F.label, sequence=row["sequence"])
            return Verdict(
                check=check,
                status=VerdictStatus.FALSIFIED,
                witness=witness,
                samples_used=index + 1,
                budget=len(sequences),
                seed=cfg.seed,
            )
    logger.info("strongness probe consistent", aggregator=F.label, sequences=len(sequences))
    return Verdict(
        check=check,
        status=VerdictStatus.CONSISTENT,
        samples_used=len(sequences),
        budget=len(sequences),
        seed=cfg.seed,
    )


# Structured images


def _ray_grid(depth: int) -> np.ndarray:
    return 2.0 ** -np.arange(0, depth + 1, dtype=float)


def image_samples(img: StructuredImage, ray_depth: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Sample rows of the image and a mask marking which came from isolated points."""
    if img.arity is None:
        raise PreconditionError("the image is empty")
    depth = ray_depth or settings.ray_depth
    blocks = [np.asarray(img.isolated, dtype=float).reshape(-1, img.arity)]
    t = _ray_grid(depth)[:, None]
    for ray in img.rays:
        blocks.append(np.asarray(ray.base) + t * np.asarray(ray.direction))
    points = np.maximum(np.vstack(blocks), 0.0)
    isolated = np.zeros(points.shape[0], dtype=bool)
    isolated[: len(img.isolated)] = True
    return points, isolated


def _descending(grid: Sequence[float], name: str) -> np.ndarray:
    values = np.asarray(grid, dtype=float)
    if values.size == 0 or (values <= 0).any() or (np.diff(values) >= 0).any():
        raise PreconditionError(f"{name} must be a nonempty strictly descending list of positive numbers")
    return values


def _in_boxes(points: np.ndarray, centers: np.ndarray, r: float) -> np.ndarray:
    if centers.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=bool)
    lo = np.maximum(centers - r, 0.0)[None, :, :]
    hi = (centers + r)[None, :, :]
    P = points[:, None, :]
    return ((P >= lo) & (P < hi)).all(axis=2).any(axis=1)


def check_usc_at_zero(
    F: AggregatorSpec,
    img: StructuredImage,
    radius_grid: Sequence[float] = DEFAULT_RADIUS_GRID,
    delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
    tol: Optional[Tolerances] = None,
    ray_depth: Optional[int] = None,
    seed: Optional[int] = None,
) -> Verdict:
    """Upper semicontinuity at 0 of the preimage multifunction of F on the image.

    Z holds the sampled zeros of F. Isolated points count with tolerance
    tol_zero, ray samples only when F is exactly 0 there, since deep ray
    samples stand in for a limit that need not be a zero. For a radius r the
    neighborhood V_r is the union of half-open boxes of radius r around Z.
    Falsified iff for some r every delta admits a sample with F < delta
    outside V_r.
    """
    tol = tol or settings.tolerances()
    radii = _descending(radius_grid, "radius_grid")
    deltas = _descending(delta_grid, "delta_grid")
    points, isolated = image_samples(img, ray_depth)
    F = resolve_arity(F, points.shape[1])
    values = evaluate_batch(F, points)
    zero = np.where(isolated, values <= tol.tol_zero, values == 0.0)
    centers = points[zero]
    budget = points.shape[0]
    seed = settings.seed if seed is None else seed

    for r in radii:
        outside = ~_in_boxes(points, centers, float(r))
        if all((outside & (values < delta)).any() for delta in deltas):
            delta = float(deltas[-1])
            candidates = np.flatnonzero(outside & (values < delta))
            best = int(candidates[np.argmax(values[candidates])])
            witness = {
                "radius": float(r),
                "delta": delta,
                "a": [float(v) for v in points[best]],
                "F(a)": float(values[best]),
            }
            logger.info("usc falsified", aggregator=F.label, radius=float(r))
            return Verdict(
                check="usc_at_zero",
                status=VerdictStatus.FALSIFIED,
                witness=witness,
                samples_used=budget,
                budget=budget,
                seed=seed,
            )
    return Verdict(
        check="usc_at_zero",
        status=VerdictStatus.CONSISTENT,
        samples_used=budget,
        budget=budget,
        seed=seed,
    )


def _entry_samples(img: StructuredImage, delta: float) -> np.ndarray:
    """One sample per moving ray at t = delta / (2 |direction|_inf), capped at t = 1."""
    rows = []
    for ray in img.rays:
        direction = np.asarray(ray.direction, dtype=float)
        steep = float(np.abs(direction).max())
        if steep > 0.0:
            rows.append(np.asarray(ray.base) + min(1.0, delta / (2.0 * steep)) * direction)
    if not rows:
        return np.empty((0, img.arity))
    return np.maximum(np.vstack(rows), 0.0)


def check_restricted_continuity_at_zero(
    F: AggregatorSpec,
    img: StructuredImage,
    cfg: Optional[SamplerConfig] = None,
    tol: Optional[Tolerances] = None,
    ray_depth: Optional[int] = None,
) -> Verdict:
    """Continuity at 0 of F restricted to the image.

    Boxes [0, delta)^n are nested, so only the smallest one,
    delta = scale * 2^-continuity_depth, is inspected. Every moving ray also
    gets a sample inside that box when its base is 0, however steep it is.
    """
    cfg = cfg or settings.sampler_config()
    tol = tol or settings.tolerances()
    points, _ = image_samples(img, ray_depth)
    if not (points == 0.0).all(axis=1).any():
        raise PreconditionError("0_n must belong to the image")
    F = resolve_arity(F, points.shape[1])
    delta = cfg.scale * 2.0**-tol.continuity_depth
    points = np.vstack([points, _entry_samples(img, delta)])
    inside = np.flatnonzero((points < delta).all(axis=1))
    values = evaluate_batch(F, points[inside])
    best = int(np.argmax(values))
    budget = points.shape[0]
    if values[best] > tol.tol_cont:
        witness = {
            "delta": delta,
            "a": [float(v) for v in points[inside[best]]],
            "F(a)": float(values[best]),
        }
        return Verdict(
            check="restricted_continuity_at_zero",
            status=VerdictStatus.FALSIFIED,
            witness=witness,
            samples_used=budget,
            budget=budget,
            seed=cfg.seed,
        )
    return Verdict(
        check="restricted_continuity_at_zero",
        status=VerdictStatus.CONSISTENT,
        samples_used=budget,
        budget=budget,
        seed=cfg.seed,
    )


# Named curves for image payloads


def _diagonal(arity: int) -> Ray:
    return Ray(base=(0.0,) * arity, direction=(1.0,) * arity, name="diagonal")


def _unit_offset(arity: int) -> Ray:
    if arity < 2:
        raise PreconditionError("unit-offset needs arity >= 2")
    return Ray(base=(1.0,) + (0.0,) * (arity - 1), direction=(0.0,) + (1.0,) * (arity - 1), name="unit-offset")


def _identity(arity: int) -> Ray:
    if arity != 1:
        raise PreconditionError("identity is a curve of arity 1")
    return Ray(base=(0.0,), direction=(1.0,), name="identity")


NAMED_CURVES = {
    "diagonal": _diagonal,
    "unit-offset": _unit_offset,
    "identity": _identity,
}


def named_curve(name: str, arity: int) -> Ray:
    try:
        builder = NAMED_CURVES[name]
    except KeyError:
        raise PreconditionError(f"unknown curve {name!r}; known curves: {', '.join(NAMED_CURVES)}") from None
    return builder(arity)


def load_image(payload: Mapping[str, Any], arity: Optional[int] = None) -> StructuredImage:
    """Build an image from {"isolated": [...], "rays": [{"base", "direction"} | {"curve"}]}."""
    isolated = [tuple(float(v) for v in point) for point in payload.get("isolated", [])]
    if arity is None and isolated:
        arity = len(isolated[0])
    rays = []
    for entry in payload.get("rays", []):
        if "curve" in entry:
            if arity is None:
                raise PreconditionError("named curves need an arity")
            rays.append(named_curve(entry["curve"], arity))
            continue
        try:
            rays.append(Ray(**entry))
        except ValidationError as exc:
            raise PreconditionError(f"invalid ray {entry!r}: {exc.errors()[0]['msg']}") from exc
    try:
        return StructuredImage(isolated=tuple(isolated), rays=tuple(rays))
    except ValidationError as exc:
        raise PreconditionError(f"invalid image: {exc.errors()[0]['msg']}") from exc


def describe_image(img: StructuredImage) -> Dict[str, Any]:
    return {
        "arity": img.arity,
        "isolated": [list(point) for point in img.isolated],
        "rays": [ray.model_dump() for ray in img.rays],
    }
