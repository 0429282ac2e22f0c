"""Command-line entry point: ``hullinv prove MODEL``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import ExitStack
from pathlib import Path

from . import __version__
from .frontend import BUNDLED, ParseError, bundled_text, parse
from .orchestrator import FALSIFIED, VALID, RunConfig, emit_log, replay, run
from .smt.base import OracleError

EXIT_VALID, EXIT_FALSIFIED, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    return name.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hullinv", description="Prove safety properties of symbolic transition systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("prove", help="prove the property of a model")
    pr.add_argument("model", help=f"model file, or a bundled model name ({', '.join(BUNDLED)})")
    pr.add_argument("--max-k", type=_positive, default=10)
    pr.add_argument("--max-preimages", type=_positive, default=10)
    pr.add_argument("--no-ech", action="store_true", help="skip exact hulls")
    pr.add_argument("--no-ich", action="store_true", help="skip inexact hulls")
    pr.add_argument("--no-intervals", action="store_true", help="skip the interval bound pass")
    pr.add_argument("--trust-assumes", action="store_true", help="use assume clauses without proving them")
    pr.add_argument("--solver", metavar="CMD", help='SMT-LIB solver command, or "builtin"')
    pr.add_argument("--timeout", type=float, default=10.0, metavar="SECS", help="per-query timeout")
    pr.add_argument("--budget", type=_positive, default=256, help="disjunct budget for projection")
    pr.add_argument("--max-hulls", type=_positive, default=256, help="stop exact hull enumeration here")
    pr.add_argument("--json", action="store_true", help="print the proof log as JSON")
    pr.add_argument("--dump-preimages", metavar="PATH")
    pr.add_argument("--dump-hulls", metavar="PATH")
    pr.add_argument("--replay", metavar="CERT", help="re-check a certificate instead of proving")
    pr.add_argument("--parallel", action="store_true")
    pr.add_argument("--preimage-fixpoint", action="store_true", help="stop when preimages add nothing new")
    pr.add_argument("--set", action="append", type=_assignment, default=[], metavar="NAME=VALUE",
                    help="override a model constant")
    pr.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _load(model: str, consts: dict):
    path = Path(model)
    if path.exists():
        text = path.read_text(encoding="utf-8")
    elif model in BUNDLED:
        text = bundled_text(model)
    else:
        raise FileNotFoundError(model)
    return parse(text, consts), str(path)


def _replay(sys_, args) -> int:
    data = json.loads(Path(args.replay).read_text(encoding="utf-8"))
    cert = data.get("certificate", data)
    rep = replay(sys_, cert, args.solver, args.timeout)
    if args.json:
        print(json.dumps({"base": rep.base_ok, "step": rep.step_ok, "k": rep.k,
                          "confirmed": rep.confirmed, "detail": rep.detail}, indent=2))
    else:
        verdict = "confirmed" if rep.confirmed else "NOT confirmed"
        print(f"certificate for {sys_.name} at k = {rep.k}: {verdict}")
        if rep.detail:
            print(rep.detail)
    if rep.confirmed:
        return EXIT_VALID
    if rep.base_ok is False or rep.step_ok is False:
        return EXIT_FALSIFIED
    return EXIT_UNKNOWN


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        sys_, name = _load(args.model, dict(args.set))
    except FileNotFoundError:
        print(f"hullinv: no such model: {args.model}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        for d in e.diagnostics:
            print(d.render(args.model), file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError) as e:
        print(f"hullinv: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.replay:
        try:
            return _replay(sys_, args)
        except (OSError, ValueError, KeyError, ParseError) as e:
            print(f"hullinv: cannot replay {args.replay}: {e}", file=sys.stderr)
            return EXIT_USAGE

    with ExitStack() as stack:
        dumps = {}
        for key in ("dump_preimages", "dump_hulls"):
            path = getattr(args, key)
            dumps[key] = stack.enter_context(open(path, "w", encoding="utf-8")) if path else None
        config = RunConfig(
            max_k=args.max_k,
            max_preimages=args.max_preimages,
            ech=not args.no_ech,
            ich=not args.no_ich,
            intervals=not args.no_intervals,
            trust_assumes=args.trust_assumes,
            solver=args.solver,
            timeout=args.timeout,
            budget=args.budget,
            max_hulls=args.max_hulls,
            parallel=args.parallel,
            preimage_fixpoint=args.preimage_fixpoint,
            **dumps,
        )
        try:
            result = run(sys_, config)
        except OracleError as e:
            print(f"hullinv: solver failure: {e}", file=sys.stderr)
            return EXIT_USAGE
    print(emit_log(result, sys_, "json" if args.json else "text"))
    if result.status == VALID:
        return EXIT_VALID
    if result.status == FALSIFIED:
        return EXIT_FALSIFIED
    return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
