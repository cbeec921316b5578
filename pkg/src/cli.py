"""metriforge command line.

Exit codes: 0 on success, 1 when a demo misses an expectation, 2 on usage,
parse, file or precondition errors.
"""

import argparse
import json
import sys
from typing import Any, Callable, List, Optional

from pydantic import ValidationError

from src import __version__
from src.core import bind_command, clear_contextvars, get_logger, settings, setup_logging
from src.core.errors import MetriforgeError
from src.models import AggregationMode, Report
from src.services import commands, spaces
from src.services.demos import DEMOS

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_USAGE = 2


def _cmd_classify(args: argparse.Namespace) -> Report:
    return commands.run_classify(
        args.fn,
        arity=args.arity,
        samples=args.samples,
        seed=args.seed,
        scale=args.scale,
        workers=args.workers,
    )


def _members(args: argparse.Namespace):
    return [spaces.load_space(path) for path in args.space]


def _cmd_axioms(args: argparse.Namespace) -> Report:
    return commands.run_axioms(args.fn, AggregationMode(args.mode), _members(args))


def _cmd_topology(args: argparse.Namespace) -> Report:
    return commands.run_topology(args.fn, AggregationMode(args.mode), _members(args))


def _cmd_probe(args: argparse.Namespace) -> Report:
    image = None
    if args.image:
        with open(args.image) as handle:
            image = json.load(handle)
    return commands.run_probe(
        args.fn, args.scenario, K=args.K, arity=args.arity, image=image, seed=args.seed
    )


def _cmd_demo(args: argparse.Namespace) -> Report:
    return commands.run_demo(args.name, seed=args.seed, samples=args.samples, workers=args.workers)


def _cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    uvicorn.run("src.main:app", host=args.host, port=args.port, log_level=args.log_level.lower())


def _render_classify(report: Report) -> List[str]:
    results = report.results
    lines = [f"{results['aggregator']} (arity {results['arity']}), seed {report.seed}"]
    for name, verdict in {**results["verdicts"], **results["auxiliary"]}.items():
        line = f"  {name:<28} {verdict['status']}"
        if verdict.get("witness"):
            line += f"  witness={json.dumps(verdict['witness'])}"
        lines.append(line)
    lines.append("classes:")
    for name, verdict in results["classes"].items():
        lines.append(f"  {name:<28} {verdict['membership']}")
    if results.get("series_tail_bound") is not None:
        lines.append(f"series tail bound: {results['series_tail_bound']:g}")
    return lines


def render_text(report: Report) -> str:
    if report.command == "classify":
        lines = _render_classify(report)
    else:
        lines = [f"{report.command}: {'ok' if report.ok else 'FAILED'} (seed {report.seed})"]
        for key, value in report.results.items():
            if key == "expectations":
                for expectation in value:
                    mark = "ok  " if expectation["met"] else "FAIL"
                    lines.append(f"  [{mark}] {expectation['expectation']}")
                continue
            lines.append(f"  {key}: {json.dumps(value)}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metriforge", description="Aggregation functions for quasi-pseudometrics"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level, help="log level for standard error")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")

    sampled = argparse.ArgumentParser(add_help=False)
    sampled.add_argument("--samples", type=int, default=None, help=f"sample budget (default {settings.budget})")
    sampled.add_argument("--seed", type=int, default=None, help=f"seed (default {settings.seed})")
    sampled.add_argument("--workers", type=int, default=None, help="threads for chunked sampling")

    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common, sampled], help="check properties and derive classes")
    s.add_argument("--fn", required=True, help="function spec, e.g. max, wsum(1,2), proj(2)")
    s.add_argument("--arity", type=int, default=None)
    s.add_argument("--scale", type=float, default=None)
    s.set_defaults(main=_cmd_classify)

    for name, handler, help_text in (
        ("axioms", _cmd_axioms, "aggregate spaces and report the axiom class"),
        ("topology", _cmd_topology, "compare product or supremum topology with the aggregated one"),
    ):
        s = sub.add_parser(name, parents=[common], help=help_text)
        s.add_argument("--fn", required=True)
        s.add_argument("--mode", choices=[m.value for m in AggregationMode], default="products")
        s.add_argument("--space", action="append", required=True, metavar="FILE", help="space file, repeatable")
        s.set_defaults(main=handler)

    s = sub.add_parser("probe", parents=[common], help="convergence and semicontinuity probes")
    s.add_argument("--fn", required=True)
    s.add_argument("--scenario", required=True, choices=list(commands.PROBE_SCENARIOS))
    s.add_argument("--K", type=int, default=None, help="null sequence depth")
    s.add_argument("--arity", type=int, default=None)
    s.add_argument("--image", default=None, metavar="FILE", help="image JSON for the image scenario")
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(main=_cmd_probe)

    s = sub.add_parser("demo", parents=[common, sampled], help="run a scenario with built-in expectations")
    s.add_argument("--name", required=True, choices=list(DEMOS))
    s.set_defaults(main=_cmd_demo)

    s = sub.add_parser("serve", help="run the HTTP API")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=settings.api_port)
    s.set_defaults(main=_cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    bind_command(args.command)
    handler: Callable[[argparse.Namespace], Any] = args.main
    try:
        report = handler(args)
    except (MetriforgeError, ValidationError, OSError, json.JSONDecodeError) as exc:
        logger.info("command failed", error=type(exc).__name__)
        print(f"metriforge {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        clear_contextvars()

    if report is None:
        return EXIT_OK
    print(report.model_dump_json(indent=2) if args.json else render_text(report))
    if args.command == "demo" and not report.ok:
        return EXIT_EXPECTATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
