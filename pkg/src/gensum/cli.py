"""Command-line front end: ``gensum <command> ...``.

Exit codes: 0 success, 1 bad input or a non-strong instance, 2 a theorem
violation was detected (an implementation bug), 3 the requested cycle length
does not exist.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from .builder import GenSum, OrientationMap, SummandSpec, bit_count, build, sample_orientation
from .campaign import CampaignConfig, run_campaign
from .classify import DEFAULT_BUDGET, verify_instance
from .constructive import ConstructionTrace, constructive_certificates
from .digraph import cycle_cover, cycle_through_vertex, is_strong
from .errors import GensumError, NotStrongError
from .serialize import dumps_gensum, load_gensum, summands_from_dicts, to_dot

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION, EXIT_ABSENT = 0, 1, 2, 3

log = logging.getLogger("gensum")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


def _parse_orders(text: str) -> list[int]:
    try:
        orders = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated orders, got {text!r}") from exc
    if len(orders) < 2:
        raise argparse.ArgumentTypeError("need at least two summand orders")
    return orders


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit(rows: dict, fmt: str) -> None:
    """Print a flat summary in the requested format."""
    if fmt == "json":
        print(json.dumps(rows, indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["field", "value"])
        for key, value in rows.items():
            writer.writerow([key, json.dumps(value) if isinstance(value, (list, dict)) else value])
        sys.stdout.write(buf.getvalue())
    else:
        for key, value in rows.items():
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, (list, tuple)):
                value = "{" + ", ".join(map(str, value)) + "}"
            elif isinstance(value, dict):
                value = json.dumps(value)
            print(f"{key}: {value}")


def _load_strong(path: str) -> GenSum:
    g = load_gensum(path)
    if not is_strong(g.compiled):
        raise CliError("not strong: theorems inapplicable")
    return g


# -- commands ------------------------------------------------------------------------


def cmd_build(args: argparse.Namespace) -> int:
    if args.summands:
        entries = json.loads(Path(args.summands).read_text())
        summands = summands_from_dicts(entries["summands"] if isinstance(entries, dict) else entries)
    elif args.cycles:
        summands = [SummandSpec.cycle(n) for n in args.cycles]
    else:
        raise CliError("give --cycles or --summands")
    bits = bit_count([s.order for s in summands])
    if args.bits is not None:
        orientation = OrientationMap.from_hex(args.bits, bits)
    elif args.seed is not None:
        orientation = sample_orientation(summands, args.seed)
    else:
        raise CliError("give --bits or --seed")
    g = build(summands, orientation)
    text = dumps_gensum(g)
    summary = {
        "order": g.order,
        "strong": is_strong(g.compiled),
        "exterior arcs": len(g.exterior_arcs()),
        "orientation_bits": g.orientation.hex(),
    }
    if any(n == 2 for n in g.orders):
        summary["note"] = "instance has a summand of order 2"
    if args.output in (None, "-"):
        sys.stdout.write(text)
        for key, value in summary.items():
            print(f"{key}: {str(value).lower() if isinstance(value, bool) else value}", file=sys.stderr)
    else:
        Path(args.output).write_text(text)
        _emit(summary, args.format)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    g = _load_strong(args.instance)
    report = verify_instance(g, args.budget)
    data = report.to_dict()
    if args.output:
        Path(args.output).write_text(json.dumps(data, indent=2) + "\n")
    if args.format == "json":
        print(json.dumps(data, indent=2))
    else:
        summary = {
            "verdict": data["verdict"],
            "rung": data["rung"],
            "guaranteed": data["guaranteed"],
            "spectrum": "oracle skipped" if data["spectrum"] is None else data["spectrum"],
            "vertex_pancyclic": data["vertex_pancyclic"],
            "violations": len(data["violations"]),
            "open_problem": "none" if report.open_problem is None else report.open_problem.kind,
        }
        _emit(summary, args.format)
    for finding in data["violations"]:
        print(f"THEOREM-VIOLATION: {json.dumps(finding)}", file=sys.stderr)
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    if args.samples is not None:
        mode, limit = "sample", args.samples
        seed = 0 if args.seed is None else args.seed
    else:
        mode, limit, seed = "exhaustive", args.limit, args.seed
    config = CampaignConfig(
        orders=tuple(args.cycles),
        mode=mode,
        seed=seed,
        offset=args.offset,
        limit=limit,
        workers=args.workers,
        budget=args.budget,
        modulo_rotation=args.modulo_rotation,
        output=args.output,
        checkpoint=args.checkpoint,
    )
    report = run_campaign(config)
    counts = report.tally.counts()
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        summary = {
            "counting": "modulo-rotation" if config.modulo_rotation else "raw",
            "total": counts["total"],
            "strong": counts["strong"],
            "verdicts": counts["verdicts"],
            "rungs": counts["rungs"],
            "violations": counts["violations"],
            "open_problems": counts["open_problems"],
            "wall_time": round(report.wall_time, 2),
        }
        _emit(summary, args.format)
    return EXIT_VIOLATION if counts["violations"] else EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    g = _load_strong(args.instance)
    length = args.length
    if not 3 <= length <= g.order:
        raise CliError(f"length must lie in [3, {g.order}]")
    traces = constructive_certificates(g).traces
    if length in traces and traces[length].is_valid(g):
        trace, source = traces[length], "constructive"
    else:
        cycle = None
        for v in range(g.order):
            cycle = cycle_through_vertex(g.compiled, v, length)
            if cycle is not None:
                break
        if cycle is None:
            raise CliError(f"no cycle of length {length} exists", EXIT_ABSENT)
        trace, source = ConstructionTrace("oracle", {}, cycle, length), "oracle"
    data = {**trace.to_dict(), "length": length, "source": source}
    text = json.dumps(data, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        _emit({"length": length, "pattern": trace.pattern, "source": source}, args.format)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    g = load_gensum(args.instance)
    highlight = None
    if args.highlight:
        highlight = json.loads(Path(args.highlight).read_text())["cycle"]
    _write(to_dot(g, highlight), args.output)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    g = load_gensum(args.instance)
    if g.order > args.budget:
        raise CliError(f"order {g.order} exceeds the oracle budget {args.budget}")
    cover = cycle_cover(g.compiled)
    spectrum = cover.spectrum
    rows = {
        "order": g.order,
        "strong": is_strong(g.compiled),
        "spectrum": sorted(spectrum.lengths),
        "missing": sorted(spectrum.missing),
        "pancyclic": not spectrum.missing,
        "vertex_pancyclic": cover.vertex_pancyclic,
    }
    if args.format == "json":
        rows["witnesses"] = {str(k): list(c) for k, c in spectrum.witnesses.items()}
    _emit(rows, args.format)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=1, help="worker processes for campaigns")
    common.add_argument("--seed", type=int, default=None, help="orientation / sampling seed")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="largest order the oracle handles")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="gensum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="write a GenSum JSON instance")
    p.add_argument("--cycles", type=_parse_orders, help="summand orders, e.g. 4,3")
    p.add_argument("--summands", help="JSON file with summand entries")
    p.add_argument("--bits", help="orientation as a hex string")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("classify", parents=[common], help="classify and verify one instance")
    p.add_argument("instance")
    p.add_argument("-o", "--output", help="write the gsl-report/1 JSON here")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("search", parents=[common], help="run a verification campaign")
    p.add_argument("--cycles", type=_parse_orders, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="every orientation (default)")
    mode.add_argument("--samples", type=int, help="number of seeded samples")
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--limit", type=int)
    p.add_argument("--checkpoint", help="sidecar file for resumable runs")
    p.add_argument("--modulo-rotation", action="store_true", help="count one orientation per rotation class of the first cycle")
    p.add_argument("-o", "--output", help="write the campaign report JSON here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("certify", parents=[common], help="emit a cycle certificate")
    p.add_argument("instance")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("export-dot", parents=[common], help="render an instance as DOT")
    p.add_argument("instance")
    p.add_argument("--highlight", help="trace JSON whose cycle is highlighted")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("spectrum", parents=[common], help="exact cycle-length spectrum")
    p.add_argument("instance")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NotStrongError as exc:
        print(f"error: not strong: theorems inapplicable ({exc})", file=sys.stderr)
        return EXIT_ERROR
    except (GensumError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
