"""``satqos`` command line.

Exit codes: 0 success, 1 runtime error, 2 plan validation error,
3 aggregation error, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import SatQosError, UsageError
from .orbit import generate_constellation, propagate_all
from .report import canonical_json, parse_bundle, write_outputs
from .testplan import load_plan, validate_compat, with_seed
from .topology import snapshot

EXIT_OK = 0
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="satqos", description=__doc__.splitlines()[0])
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a plan file")
    p.add_argument("--plan", required=True, type=Path)

    p = sub.add_parser("topology", help="print the ISL snapshot at one instant")
    p.add_argument("--plan", required=True, type=Path)
    p.add_argument("--at", required=True, type=_nonneg_float, metavar="SECONDS")

    p = sub.add_parser("run", help="execute the full pipeline")
    p.add_argument("--plan", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--jobs", type=_positive_int)

    p = sub.add_parser("report", help="re-emit outputs from an existing report.json")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--bundle", type=Path, help="defaults to <out>/report.json")
    p.add_argument("--plan", type=Path, help="accepted for symmetry; unused")
    return parser


def _load(args):
    plan = load_plan(args.plan)
    if getattr(args, "seed", None) is not None:
        plan = with_seed(plan, args.seed)
    return plan


def cmd_validate(args) -> int:
    plan = _load(args)
    for warning in validate_compat(plan):
        print(f"warning: {warning}", file=sys.stderr)
    print(f"plan ok: {args.plan}")
    return EXIT_OK


def cmd_topology(args) -> int:
    plan = _load(args)
    specs = generate_constellation(plan.constellation)
    snap = snapshot(propagate_all(specs, args.at), plan.visibility, args.at)
    sys.stdout.write(canonical_json(snap.to_dict()).decode())
    return EXIT_OK


def cmd_run(args) -> int:
    from .pipeline import run_plan

    plan = _load(args)
    for warning in validate_compat(plan):
        print(f"warning: {warning}", file=sys.stderr)
    bundle = run_plan(plan, jobs=args.jobs, progress=print)
    write_outputs(bundle, args.out)
    print(f"done runs={len(bundle.runs)} skipped={len(bundle.skips)} out={args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    source = args.bundle or args.out / "report.json"
    try:
        data = source.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read bundle {source}: {exc}") from exc
    bundle = parse_bundle(data)
    write_outputs(bundle, args.out)
    print(f"done runs={len(bundle.runs)} out={args.out}")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "topology": cmd_topology, "run": cmd_run, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return COMMANDS[args.command](args)
    except SatQosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
