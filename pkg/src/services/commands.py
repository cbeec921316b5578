"""Command layer shared by the CLI and the HTTP surface.

Every command returns a :class:`Report`; identical inputs and seed give an
identical report.
"""

from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from src import __version__
from src.core import get_logger, settings
from src.core.errors import AggregationCounterexample, PreconditionError
from src.models import (
    AggregationMode,
    AggregatorSpec,
    FiniteSpace,
    Report,
    SamplerConfig,
    SequenceVariant,
    StructuredImage,
    Tolerances,
)
from src.services import alexandrov, classifier, demos, probe, spaces
from src.services.aggregators import describe, parse_spec, resolve_arity

logger = get_logger(__name__)

CLASSIFY_CITATIONS = [
    "quasi-pseudometric aggregation on products: F(0) = 0, subadditive and monotone",
    "metric aggregation: F^-1(0) = {0} and triangle triplets are preserved",
    "strong aggregation additionally requires continuity at 0",
]
AXIOMS_CITATIONS = ["F o d_Pi and F o d_Delta are checked directly against the quasi-pseudometric axioms"]
TOPOLOGY_CITATIONS = [
    "product topology is coarser than the aggregated one iff F^-1(0) = {0}",
    "on a finite space every topology is Alexandrov: U(x) = {y : d(x, y) = 0}",
]


def sampler_config(
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    scale: Optional[float] = None,
    workers: Optional[int] = None,
) -> SamplerConfig:
    return settings.sampler_config(seed=seed, budget=samples, scale=scale, workers=workers)


def _report(
    command: str,
    inputs: Dict[str, Any],
    results: Dict[str, Any],
    citations: Sequence[str],
    seed: int,
    ok: bool = True,
) -> Report:
    return Report(
        command=command,
        inputs=inputs,
        results=results,
        citations=list(citations),
        ok=ok,
        seed=seed,
        version=__version__,
    )


def run_classify(
    fn: str,
    arity: Optional[int] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    scale: Optional[float] = None,
    workers: Optional[int] = None,
) -> Report:
    F = resolve_arity(parse_spec(fn), arity)
    cfg = sampler_config(seed, samples, scale, workers)
    report = classifier.classify(F, cfg)
    inputs = {"fn": fn, "arity": F.arity, "samples": cfg.budget, "scale": cfg.scale}
    return _report("classify", inputs, report.model_dump(mode="json"), CLASSIFY_CITATIONS, cfg.seed)


def _aggregate(F: AggregatorSpec, mode: AggregationMode, members: Sequence[FiniteSpace]) -> FiniteSpace:
    if mode == AggregationMode.PRODUCTS:
        return spaces.product_aggregate(F, members)
    return spaces.set_aggregate(F, members)


def run_axioms(fn: str, mode: AggregationMode, members: Sequence[FiniteSpace]) -> Report:
    """Aggregate and report the axiom class, or the violated axioms."""
    F = parse_spec(fn)
    inputs = {"fn": fn, "mode": mode.value, "members": [spaces.describe_space(m) for m in members]}
    try:
        aggregated = _aggregate(F, mode, members)
    except AggregationCounterexample as exc:
        results = {"aggregator": describe(F.bind(len(members))), "axiom_class": None, "violations": exc.violations}
    else:
        results = {
            "aggregator": describe(F.bind(len(members))),
            "axiom_class": aggregated.axiom_class.value,
            "aggregated": spaces.describe_space(aggregated),
            "violations": [],
        }
    return _report("axioms", inputs, results, AXIOMS_CITATIONS, settings.seed)


def run_topology(fn: str, mode: AggregationMode, members: Sequence[FiniteSpace]) -> Report:
    F = parse_spec(fn)
    if mode == AggregationMode.PRODUCTS:
        report = alexandrov.check_product_inclusion(F, members)
    else:
        report = alexandrov.check_sup_inclusion(F, members)
    inputs = {"fn": fn, "mode": mode.value, "members": [spaces.describe_space(m) for m in members]}
    return _report("topology", inputs, report.model_dump(mode="json"), TOPOLOGY_CITATIONS, settings.seed)


# Probe scenarios


def _probe_arity(F: AggregatorSpec, arity: Optional[int]) -> int:
    if arity is not None:
        return arity
    fixed = F.fixed_arity()
    if fixed is not None:
        return fixed
    return max(2, F.coordinate or 1)


def _null_sequences(variant: SequenceVariant) -> Callable[..., Dict[str, Any]]:
    def scenario(F: AggregatorSpec, arity: int, K: Optional[int], image, cfg, tol) -> Dict[str, Any]:
        family = probe.null_sequence_family(arity, K, variant)
        sequences = probe.default_sequences(arity, family[0].K)
        rows = probe.probe_sequences(F, family, sequences)
        verdict = probe.strongness_probe(F, family, sequences, cfg=cfg, tol=tol)
        return {
            "variant": variant.value,
            "K": family[0].K,
            "sequences": [
                {
                    "sequence": row["sequence"],
                    "product_topology": row["reference"].model_dump(mode="json"),
                    "aggregated": row["aggregated"].model_dump(mode="json"),
                }
                for row in rows
            ],
            "strongness": verdict.model_dump(mode="json"),
        }

    return scenario


def _image_checks(F: AggregatorSpec, img: StructuredImage, cfg: SamplerConfig, tol: Tolerances) -> Dict[str, Any]:
    results = {
        "image": probe.describe_image(img),
        "usc": probe.check_usc_at_zero(F, img, tol=tol, seed=cfg.seed).model_dump(mode="json"),
    }
    try:
        restricted = probe.check_restricted_continuity_at_zero(F, img, cfg, tol)
    except PreconditionError as exc:
        results["restricted_continuity"] = {"skipped": str(exc)}
    else:
        results["restricted_continuity"] = restricted.model_dump(mode="json")
    return results


def _usc_projection(F, arity, K, image, cfg, tol) -> Dict[str, Any]:
    return _image_checks(F, demos.usc_projection_image(), cfg, tol)


def _image(F, arity, K, image, cfg, tol) -> Dict[str, Any]:
    if image is None:
        raise PreconditionError("the image scenario needs an image payload")
    return _image_checks(F, probe.load_image(image, arity), cfg, tol)


PROBE_SCENARIOS: Dict[str, Callable[..., Dict[str, Any]]] = {
    "null-seq": _null_sequences(SequenceVariant.EUCLIDEAN),
    "null-seq-upper": _null_sequences(SequenceVariant.UPPER),
    "usc-projection": _usc_projection,
    "image": _image,
}


def run_probe(
    fn: str,
    scenario: str,
    K: Optional[int] = None,
    arity: Optional[int] = None,
    image: Optional[Mapping[str, Any]] = None,
    seed: Optional[int] = None,
) -> Report:
    try:
        runner = PROBE_SCENARIOS[scenario]
    except KeyError:
        raise PreconditionError(
            f"unknown scenario {scenario!r}; known scenarios: {', '.join(PROBE_SCENARIOS)}"
        ) from None
    F = parse_spec(fn)
    cfg = sampler_config(seed)
    if scenario in ("usc-projection", "image"):
        # the image fixes the arity
        results = runner(F, arity, K, image, cfg, settings.tolerances())
    else:
        n = _probe_arity(F, arity)
        results = runner(F.bind(n), n, K, image, cfg, settings.tolerances())
    inputs = {"fn": fn, "scenario": scenario, "K": K, "arity": arity}
    citations = [
        "strong aggregation holds iff F is continuous at 0",
        "convergence is read through left balls B(x, eps) = {y : d(x, y) < eps}",
    ]
    return _report("probe", inputs, results, citations, cfg.seed)


def run_demo(
    name: str, seed: Optional[int] = None, samples: Optional[int] = None, workers: Optional[int] = None
) -> Report:
    cfg = sampler_config(seed, samples, workers=workers)
    demo, results, expectations = demos.run_demo(name, cfg, settings.tolerances())
    ok = all(e["met"] for e in expectations)
    inputs = {"name": name, "samples": cfg.budget}
    body = {"description": demo.description, "expectations": expectations, **results}
    return _report("demo", inputs, body, [demo.citation], cfg.seed, ok=ok)


def list_demos() -> List[Dict[str, str]]:
    return [{"name": d.name, "description": d.description} for d in demos.DEMOS.values()]
