"""Command-line front end.

Exit status: 0 success, 1 runtime error, 2 grammar rejected (parse or
analysis), 3 usage error or unreadable input.  Results go to stdout, every
diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from typing import Optional, Sequence

from .analyzer import INF, check_well_founded
from .counter import series
from .dsl import parse
from .enumerator import (
    GENERATOR_VERSION,
    MAX_SEED,
    format_structure,
    list_structures,
    random_structure,
    structure_to_json,
    unrank,
)
from .errors import AnalysisError, InsufficientTermsError, SpeccError
from .grammar import LABELED, SpecSystem
from .recurrence import guess_recurrence, render_recurrence, verify

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_REJECTED = 2
EXIT_USAGE = 3


class _Exit(Exception):
    def __init__(self, status: int, message: str = ""):
        self.status = status
        self.message = message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Exit(EXIT_USAGE, f"{self.prog}: usage error: {message}")


def _err(*lines):
    for line in lines:
        print(line, file=sys.stderr)


def _load(args) -> SpecSystem:
    try:
        with open(args.file, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"{args.file}: cannot read: {exc.strerror or exc}")
    mode = LABELED if getattr(args, "labeled", False) else None
    res = parse(text, mode=mode)
    for d in res.diagnostics:
        _err(f"{args.file}:{d}")
    if res.system is None:
        raise _Exit(EXIT_REJECTED)
    system = res.system
    if args.cls is not None:
        if args.cls not in system:
            raise _Exit(EXIT_USAGE, f"unknown class {args.cls}")
        system = system.with_root(args.cls)
    report = check_well_founded(system)
    if not report.ok:
        _err(*report.render_lines())
        raise _Exit(EXIT_REJECTED)
    return system


def _fmt_val(v) -> str:
    return "inf" if v == INF else str(v)


def cmd_check(args) -> int:
    system = _load(args)
    report = check_well_founded(system)
    _err(*(d.render() for d in report.warnings))
    print("ok")
    for name in system.names:
        print(f"val {name} = {_fmt_val(report.valuation[name])}")
    return EXIT_OK


def cmd_count(args) -> int:
    system = _load(args)
    if args.upto is not None:
        for n, c in enumerate(series(system, system.root, args.upto)):
            print(f"{n}\t{c}")
    else:
        print(series(system, system.root, args.size)[args.size])
    return EXIT_OK


def cmd_list(args) -> int:
    system = _load(args)
    items = list_structures(system, system.root, args.size, args.limit)
    if args.format == "jsonl":
        if args.meta:
            meta = {"v": 1, "class": system.root, "size": args.size, "count": len(items)}
            print(json.dumps(meta, separators=(",", ":")))
        for s in items:
            print(json.dumps(structure_to_json(s), separators=(",", ":")))
    else:
        for s in items:
            print(format_structure(s))
    return EXIT_OK


def cmd_unrank(args) -> int:
    system = _load(args)
    print(format_structure(unrank(system, system.root, args.size, args.rank)))
    return EXIT_OK


def cmd_random(args) -> int:
    system = _load(args)
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(64)
        _err(f"seed: {seed} (generator v{GENERATOR_VERSION})")
    elif not 0 <= seed < MAX_SEED:
        raise _Exit(EXIT_USAGE, f"--seed must be in [0, 2^64), got {seed}")
    print(format_structure(random_structure(system, system.root, args.size, seed)))
    return EXIT_OK


def cmd_guess_rec(args) -> int:
    system = _load(args)
    terms = series(system, system.root, args.terms - 1)
    try:
        rec = guess_recurrence(terms, args.max_order, args.max_degree)
    except InsufficientTermsError as exc:
        raise _Exit(EXIT_RUNTIME, f"error: {exc}")
    if rec is None:
        print(f"no recurrence found (order<={args.max_order}, degree<={args.max_degree})")
        return EXIT_OK
    if len(terms) <= rec.order:
        _err(f"warning: only {len(terms)} terms; the recurrence holds vacuously")
    if not verify(rec, terms):
        raise _Exit(EXIT_RUNTIME, "error: recurrence failed verification")
    print(render_recurrence(rec))
    return EXIT_OK


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {v}")
    return v


def _positive(text: str) -> int:
    v = _nonneg(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specc", description="Count, enumerate and sample decomposable classes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text, size=False, labeled=False):
        c = sub.add_parser(name, help=help_text)
        c.add_argument("file", help="grammar file (.spec)")
        c.add_argument("--class", dest="cls", metavar="NAME", help="class (default: first definition)")
        if size:
            c.add_argument("--size", type=_nonneg, required=True)
        if labeled:
            c.add_argument("--labeled", action="store_true", help="count labeled structures")
        c.set_defaults(func=func)
        return c

    command("check", cmd_check, "parse and analyze; print valuations")

    c = command("count", cmd_count, "count structures", labeled=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--size", type=_nonneg)
    g.add_argument("--upto", type=_nonneg)

    c = command("list", cmd_list, "list structures in canonical order", size=True)
    c.add_argument("--limit", type=_nonneg)
    c.add_argument("--format", choices=("text", "jsonl"), default="text")
    c.add_argument("--meta", action="store_true", help="jsonl: emit a versioned metadata line first")

    c = command("unrank", cmd_unrank, "structure at a given rank", size=True)
    c.add_argument("--rank", type=_nonneg, required=True)

    c = command("random", cmd_random, "uniform random structure", size=True)
    c.add_argument("--seed", type=int)

    c = command("guess-rec", cmd_guess_rec, "guess a P-recurrence", labeled=True)
    c.add_argument("--terms", type=_positive, default=30, help="number of terms u(0..terms-1)")
    c.add_argument("--max-order", type=_positive, default=2)
    c.add_argument("--max-degree", type=_nonneg, default=2)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            _err(exc.message)
        return exc.status
    except AnalysisError as exc:
        _err(*exc.report.render_lines())
        return EXIT_REJECTED
    except SpeccError as exc:
        _err(f"error: {exc}")
        return EXIT_RUNTIME
    except RecursionError:
        _err("error: recursion limit exceeded")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
