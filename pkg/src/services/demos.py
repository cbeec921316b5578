"""End-to-end scenarios with built-in expectations.

Each demo returns its results and a list of expectations; a report is ok only
when every expectation is met.
"""

from typing import Any, Callable, Dict, List, NamedTuple, Tuple

import numpy as np

from src.core import get_logger
from src.core.errors import PreconditionError
from src.models import (
    AggregationMode,
    AxiomClass,
    ConvergenceMode,
    Membership,
    PropertyKind,
    SamplerConfig,
    StructuredImage,
    Tolerances,
    TopologyOrder,
)
from src.services import alexandrov, classifier, probe, sampling, spaces
from src.services.aggregators import parse_spec, resolve_arity
from src.services.sampling import Stream

logger = get_logger(__name__)

Expectation = Dict[str, Any]
DemoOutcome = Tuple[Dict[str, Any], List[Expectation]]


class Demo(NamedTuple):
    name: str
    description: str
    citation: str
    run: Callable[[SamplerConfig, Tolerances], DemoOutcome]


def expect(name: str, met: bool, **details: Any) -> Expectation:
    return {"expectation": name, "met": bool(met), **details}


def _membership(report, family: str, mode: str, strength: str) -> Membership:
    return report.membership(classifier.class_name(family, mode, strength))


def _max_strong(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("max"), 3)
    rng = sampling.generator(cfg, Stream.SPACES, 0)
    reports = [
        alexandrov.check_product_inclusion(F, spaces.random_family(rng, AggregationMode.PRODUCTS, 3, 4))
        for _ in range(3)
    ]
    classes = classifier.classify(F, cfg, tol)
    expectations = [
        expect(f"family {i + 1}: product topology equals the aggregated one", r.order == TopologyOrder.EQUAL)
        for i, r in enumerate(reports)
    ]
    for family in classifier.CLASS_FAMILIES:
        expectations.append(
            expect(
                f"{family} strongly on products is consistent",
                _membership(classes, family, "products", "strongly") == Membership.CONSISTENT_WITH,
            )
        )
    results = {
        "topologies": [r.model_dump(mode="json") for r in reports],
        "classes": {k: v.membership.value for k, v in classes.classes.items()},
    }
    return results, expectations


def _series(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("series(4)"), 4)
    classes = classifier.classify(F, cfg, tol)
    rng = sampling.generator(cfg, Stream.SPACES, 1)
    family = spaces.random_family(rng, AggregationMode.PRODUCTS, 4, 3, symmetric=True)
    topology = alexandrov.check_product_inclusion(F, family)
    expectations = [
        expect("continuity at 0 is consistent", classes.verdicts[PropertyKind.CONTINUOUS_AT_ZERO].consistent),
        expect(
            "metric strongly on products is consistent",
            _membership(classes, "M", "products", "strongly") == Membership.CONSISTENT_WITH,
        ),
        expect("tail bound is 2^-4", classes.series_tail_bound == 2.0**-4),
        expect("topology on a random symmetric family is equal", topology.order == TopologyOrder.EQUAL),
    ]
    results = {
        "classification": classes.model_dump(mode="json"),
        "topology": topology.model_dump(mode="json"),
    }
    return results, expectations


def _dobos(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("dobos"))
    report = classifier.classify(F, cfg, tol)
    v = report.verdicts
    expectations = [
        expect("monotonicity is falsified", v[PropertyKind.MONOTONE].falsified, witness=v[PropertyKind.MONOTONE].witness),
        expect("asymmetric triplets are falsified", v[PropertyKind.ASYMMETRIC_TRIPLET].falsified),
        expect("triplet preservation is consistent", v[PropertyKind.TRIPLET_PRESERVING].consistent),
        expect("zero preimage is trivial", v[PropertyKind.ZERO_PREIMAGE_TRIVIAL].consistent),
        expect("continuity at 0 is consistent", v[PropertyKind.CONTINUOUS_AT_ZERO].consistent),
        expect(
            "metric strongly on products is consistent",
            _membership(report, "M", "products", "strongly") == Membership.CONSISTENT_WITH,
        ),
        expect(
            "quasi-pseudometric on products is excluded",
            _membership(report, "QPM", "products", "plain") == Membership.EXCLUDED,
        ),
    ]
    return {"classification": report.model_dump(mode="json")}, expectations


def _indicator_sets(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("indicator"))
    family = [spaces.discrete(2), spaces.discrete(2)]
    aggregated = spaces.set_aggregate(F, family)
    report = alexandrov.check_sup_inclusion(F, family)
    cone = classifier.check_positive_cone_triplet(F, cfg, tol)
    zero = classifier.check_zero_preimage(F, cfg, tol)
    expectations = [
        expect("aggregated space is a metric", aggregated.axiom_class == AxiomClass.METRIC),
        expect(
            "aggregated matrix is the discrete metric",
            np.array_equal(aggregated.distances(), spaces.discrete(2).distances()),
        ),
        expect("supremum and aggregated topologies agree", report.order == TopologyOrder.EQUAL),
        expect("positive cone triplet check is consistent", cone.consistent),
        expect("zero preimage is not trivial", zero.falsified, witness=zero.witness),
    ]
    results = {
        "aggregated": spaces.describe_space(aggregated),
        "supremum_inclusion": report.model_dump(mode="json"),
        "positive_cone_triplet": cone.model_dump(mode="json"),
        "zero_preimage": zero.model_dump(mode="json"),
    }
    return results, expectations


def _projection_sets(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("proj(2)"), 2)
    family = [spaces.discrete(2), spaces.indiscrete(2)]
    report = alexandrov.check_sup_inclusion(F, family)
    aggregated = spaces.set_aggregate(F, family)
    expectations = [
        expect("supremum topology is not coarser than the aggregated one", not report.left_in_right),
        expect("aggregated topology is strictly coarser", report.order == TopologyOrder.SECOND_COARSER_STRICT),
        expect("aggregated space is a pseudometric", aggregated.axiom_class == AxiomClass.PSEUDOMETRIC),
    ]
    results = {"topology": report.model_dump(mode="json"), "aggregated": spaces.describe_space(aggregated)}
    return results, expectations


def _zero_preimage_twopoint(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("indicator"))
    verdict = classifier.check_zero_preimage(F, cfg, tol)
    if not verdict.falsified:
        return {"zero_preimage": verdict.model_dump(mode="json")}, [expect("zero preimage is falsified", False)]
    witness = classifier.shrink_witness(F, PropertyKind.ZERO_PREIMAGE_TRIVIAL, verdict.witness, tol)["a"]
    products = alexandrov.zero_preimage_counterexample(F, witness, AggregationMode.PRODUCTS)
    sets = alexandrov.zero_preimage_counterexample(F, witness, AggregationMode.SETS)
    expectations = [
        expect("zero preimage is falsified", True, witness=witness),
        expect("product topology is not coarser than the aggregated one", not products.left_in_right),
        expect("supremum topology is not coarser than the aggregated one", not sets.left_in_right),
    ]
    results = {
        "witness": witness,
        "products": products.model_dump(mode="json"),
        "sets": sets.model_dump(mode="json"),
    }
    return results, expectations


def _oneway_quasi(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("max"), 2)
    aggregated = spaces.product_aggregate(F, [spaces.oneway(2), spaces.discrete(2)])
    indicator = resolve_arity(parse_spec("indicator"))
    sets = alexandrov.zero_preimage_counterexample(indicator, (0.0, 1.0), AggregationMode.SETS, quasi=True)
    expectations = [
        expect("max on oneway x discrete is a quasi-metric", aggregated.axiom_class == AxiomClass.QUASI_METRIC),
        expect("aggregated distance is asymmetric", not aggregated.axiom_class.symmetric),
        expect("quasi two-point family: supremum topology is not coarser", not sets.left_in_right),
    ]
    results = {"aggregated": spaces.describe_space(aggregated), "sets": sets.model_dump(mode="json")}
    return results, expectations


LU_VALUES = (0.0, 0.2, 0.4, 0.6, 0.8)


def _lu_image(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    n = 2
    family = spaces.lu_family(LU_VALUES, n)
    origin = (0.0,) * n
    row = family.members[0].index(origin)
    errors = []
    for y, point in enumerate(family.members[0].points):
        observed = np.asarray([member.matrix[row][y] for member in family.members])
        errors.append(float(np.abs(observed - np.asarray(point)).max()))
    image = spaces.image_of_ddelta(family, origin)
    max_error = max(errors)
    expectations = [
        expect("d_i(0, a) = a_i on the whole grid", max_error == 0.0, max_error=max_error),
        expect("image has one tuple per grid point", len(image) == len(LU_VALUES) ** n),
        expect("every member is a quasi-metric", all(m.axiom_class.separated for m in family.members)),
    ]
    results = {
        "values": list(LU_VALUES),
        "arity": n,
        "max_error": max_error,
        "image": [list(t.values) for t in image],
    }
    return results, expectations


def _jump_not_strong(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("jump"))
    family = probe.null_sequence_family(1)
    diagonal = probe.default_sequences(1, family[0].K)[0]
    product = probe.converges(family, diagonal, ConvergenceMode.PRODUCT_TOPOLOGY, F)
    aggregated = probe.converges(family, diagonal, ConvergenceMode.AGGREGATED, F)
    verdict = probe.strongness_probe(F, family, cfg=cfg, tol=tol)
    continuity = classifier.check_continuity_at_zero(F, cfg, tol)
    expectations = [
        expect("1/k converges in the product topology", product.converges),
        expect("1/k does not converge for the aggregated distance", not aggregated.converges),
        expect("strongness probe is falsified", verdict.falsified),
        expect("continuity at 0 is falsified", continuity.falsified),
    ]
    results = {
        "product": product.model_dump(mode="json"),
        "aggregated": aggregated.model_dump(mode="json"),
        "probe": verdict.model_dump(mode="json"),
        "continuity": continuity.model_dump(mode="json"),
    }
    return results, expectations


def usc_projection_image() -> StructuredImage:
    return StructuredImage(isolated=((0.0, 0.0),), rays=(probe.named_curve("unit-offset", 2),))


def _usc_projection(cfg: SamplerConfig, tol: Tolerances) -> DemoOutcome:
    F = resolve_arity(parse_spec("proj(2)"), 2)
    img = usc_projection_image()
    usc = probe.check_usc_at_zero(F, img, tol=tol, seed=cfg.seed)
    restricted = probe.check_restricted_continuity_at_zero(F, img, cfg, tol)
    on_ray = usc.falsified and usc.witness["a"][0] == 1.0 and usc.witness["a"][1] == usc.witness["delta"] / 2
    expectations = [
        expect("usc at 0 is falsified", usc.falsified, witness=usc.witness),
        expect("witness lies on the ray (1, t) at t = delta / 2", on_ray),
        expect("restricted continuity at 0 is consistent", restricted.consistent),
    ]
    results = {
        "image": probe.describe_image(img),
        "usc": usc.model_dump(mode="json"),
        "restricted_continuity": restricted.model_dump(mode="json"),
    }
    return results, expectations


DEMOS: Dict[str, Demo] = {
    demo.name: demo
    for demo in (
        Demo(
            "max-strong",
            "max induces the product topology on random finite families",
            "maximum of the coordinate distances: the classical supremum metric aggregates strongly",
            _max_strong,
        ),
        Demo(
            "series",
            "truncated series sum a_k / (1 + a_k) 2^-k aggregates metrics strongly",
            "weighted series of bounded transforms of the coordinate distances",
            _series,
        ),
        Demo(
            "dobos",
            "a non-monotone function that still aggregates metrics strongly",
            "non-monotone metric preserving function: strongly metric on products, not quasi",
            _dobos,
        ),
        Demo(
            "indicator-sets",
            "indicator of two positive coordinates turns two discrete metrics into the discrete metric",
            "set aggregation of metrics through a function vanishing on the axes",
            _indicator_sets,
        ),
        Demo(
            "projection-sets",
            "projection to the second coordinate on a discrete + indiscrete family",
            "supremum topology not contained in the aggregated topology",
            _projection_sets,
        ),
        Demo(
            "zero-preimage-twopoint",
            "two-point family built from a nonzero zero of F",
            "product topology not coarser than the aggregated one when F vanishes off 0",
            _zero_preimage_twopoint,
        ),
        Demo(
            "oneway-quasi",
            "asymmetric members keep the aggregated distance quasi",
            "quasi-metric aggregation on products and sets",
            _oneway_quasi,
        ),
        Demo(
            "lu-image",
            "quasi-metrics on a grid whose d_Delta image at 0 is the grid itself",
            "every tuple of [0, 1)^n is realized as d_Delta(0, a) by a quasi-metric family",
            _lu_image,
        ),
        Demo(
            "jump-not-strong",
            "jump function: 1/k converges in the product topology but not in the aggregated one",
            "strong aggregation requires continuity at 0",
            _jump_not_strong,
        ),
        Demo(
            "usc-projection",
            "projection restricted to {(0, 0)} u {1} x (0, inf) is not upper semicontinuous at 0",
            "upper semicontinuity of restricted preimages at 0",
            _usc_projection,
        ),
    )
}


def get_demo(name: str) -> Demo:
    try:
        return DEMOS[name]
    except KeyError:
        raise PreconditionError(f"unknown demo {name!r}; known demos: {', '.join(DEMOS)}") from None


def run_demo(name: str, cfg: SamplerConfig, tol: Tolerances) -> Tuple[Demo, Dict[str, Any], List[Expectation]]:
    demo = get_demo(name)
    results, expectations = demo.run(cfg, tol)
    failed = [e["expectation"] for e in expectations if not e["met"]]
    logger.info("demo finished", demo=name, expectations=len(expectations), failed=failed)
    return demo, results, expectations
