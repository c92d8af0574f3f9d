"""``crowdcov`` command line.

Exit status of ``check``: 0 SAFE, 1 COVERABLE, 2 bad input or invalid
template, 3 engine not applicable, 4 bounded verdict or budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from .engines import ENGINES, EngineError, run_engine
from .model import (
    InvalidTemplate,
    ParseError,
    SemanticsKind,
    TemplateAutomaton,
    complete_receives,
    parse_template,
    validate,
)
from .net import compile_template, dump
from .oracle import DEFAULT_BUDGET, explore
from .semantics import (
    ReplayError,
    format_config,
    format_witness,
    parse_witness,
    replay_witness,
    witness_to_json,
)
from .verdict import BudgetExceeded, Outcome

EXIT_SAFE = 0
EXIT_COVERABLE = 1
EXIT_INPUT = 2
EXIT_INAPPLICABLE = 3
EXIT_BOUNDED = 4

_EXIT = {
    Outcome.SAFE: EXIT_SAFE,
    Outcome.COVERABLE: EXIT_COVERABLE,
    Outcome.INAPPLICABLE: EXIT_INAPPLICABLE,
    Outcome.SAFE_UP_TO: EXIT_BOUNDED,
    Outcome.BUDGET_EXCEEDED: EXIT_BOUNDED,
}


class _InputError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"crowdcov: {msg}", file=sys.stderr)


def _load(path: str, complete: bool) -> tuple[TemplateAutomaton, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        t = parse_template(raw.decode("utf-8"))
    except (ParseError, UnicodeDecodeError) as exc:
        raise _InputError(f"{path}: {exc}") from None
    if complete and t.kind is SemanticsKind.BROADCAST:
        t = complete_receives(t)
    return t, hashlib.sha256(raw).hexdigest()


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_check(args) -> int:
    t, digest = _load(args.file, args.complete_receives)
    report = validate(t)
    if not report.ok:
        if args.json:
            _print_json({"verdict": "INVALID", "engine": args.engine, "digest": digest,
                         "stats": {}, "violations": [str(v) for v in report]})
        for v in report:
            _err(str(v))
        return EXIT_INPUT

    start = time.perf_counter()
    try:
        engine, verdict = run_engine(t, args.engine, oracle_n=args.oracle_n,
                                     witness=args.witness, budget=args.budget)
    except EngineError as exc:
        _err(f"internal engine error: {exc}")
        return 70
    elapsed = round((time.perf_counter() - start) * 1000, 3)

    w = verdict.witness if args.witness else None
    if args.json:
        payload = {"verdict": verdict.label, "engine": engine, "digest": digest,
                   "stats": verdict.stats, "time_ms": elapsed}
        if verdict.reason:
            payload["reason"] = verdict.reason
        if w is not None:
            payload["n"] = w.n
            payload["witness"] = witness_to_json(t, w)
        _print_json(payload)
    else:
        print(f"{verdict.label}  (engine {engine}, {elapsed} ms)")
        if verdict.reason:
            print(f"reason: {verdict.reason}")
        for key in sorted(verdict.stats):
            print(f"  {key}: {verdict.stats[key]}")
        if w is not None:
            print("witness:")
            print(format_witness(t, w), end="")
    if verdict.outcome is Outcome.INAPPLICABLE:
        _err(f"engine {engine} is not applicable: {verdict.reason}")
    return _EXIT[verdict.outcome]


def cmd_explore(args) -> int:
    t, _ = _load(args.file, args.complete_receives)
    report = validate(t)
    if not report.ok:
        for v in report:
            _err(str(v))
        return EXIT_INPUT
    try:
        reach = explore(t, args.n, budget=args.budget)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except BudgetExceeded as exc:
        _err(f"budget exceeded: {exc}")
        return EXIT_BOUNDED
    for c in reach.sorted():
        print(format_config(t, c))
    print(f"configs={len(reach)}")
    return 0


def cmd_validate(args) -> int:
    t, _ = _load(args.file, args.complete_receives)
    report = validate(t)
    if args.json:
        _print_json({"valid": report.ok, "violations": [str(v) for v in report]})
    elif report.ok:
        print("valid")
    else:
        for v in report:
            print(v)
    return 0 if report.ok else EXIT_INPUT


def cmd_compile(args) -> int:
    t, _ = _load(args.file, args.complete_receives)
    try:
        net = compile_template(t)
    except InvalidTemplate as exc:
        for v in exc.report:
            _err(str(v))
        return EXIT_INPUT
    print(dump(net), end="")
    return 0


def cmd_replay(args) -> int:
    t, _ = _load(args.file, args.complete_receives)
    try:
        w = parse_witness(t, Path(args.witness).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        _err(f"{args.witness}: {exc}")
        return EXIT_INPUT
    try:
        trace = replay_witness(t, w)
    except ReplayError as exc:
        print(f"REJECTED: {exc}")
        return 1
    for c in trace:
        print(format_config(t, c))
    print(f"ACCEPTED: {len(w.steps)} steps, n={w.n}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowdcov",
                                     description="Coverability for anonymous parameterized systems.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="crowd file")
        p.add_argument("--complete-receives", action="store_true",
                       help="add missing broadcast receives as self-loops before anything else")

    p = sub.add_parser("check", help="decide coverability of the target")
    common(p)
    p.add_argument("--engine", choices=ENGINES, default="auto")
    p.add_argument("--oracle-n", type=int, default=5, help="largest crowd tried by the oracle engine")
    p.add_argument("--witness", action="store_true", help="print a replayable witness when coverable")
    p.add_argument("--json", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("explore", help="list reachable configurations for a fixed crowd size")
    common(p)
    p.add_argument("n", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("validate", help="report well-formedness violations")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="dump the compiled net")
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("replay", help="replay a witness file against a template")
    common(p)
    p.add_argument("witness")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _InputError as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
