"""Command-line front end.

Commands: ``run`` a scenario file, ``check`` a state against the validity
clauses, ``verify`` a query suite at bounds, ``witness`` search for an
existential property.  Exit codes: 0 success / all hold / witness found;
1 action blocked, clause failed, counterexample found or no witness;
2 usage or parse error; 3 budget exhausted (inconclusive).
"""

from __future__ import annotations

import argparse
import json
import sys as _sys

from .invariants import check_clauses, standard_clauses
from .model import ParseError, emit_state, parse_state
from .operations import scenario_from_doc, step
from .statespace import Bounds
from .verifier import (
    SUITES,
    check_query,
    gen_security_queries,
    run_suite,
    verdict_to_doc,
)


def _add_bounds_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--apps", type=int, default=2, help="app pool size")
    p.add_argument("--perms", type=int, default=2, help="permission id pool size")
    p.add_argument("--grps", type=int, default=2, help="group pool size")
    p.add_argument("--maxcard", type=int, default=2,
                   help="max cardinality of generated sets")
    p.add_argument("--budget", type=int, default=100_000,
                   help="max states examined per query")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write output to a file instead of stdout")


def _bounds(args) -> Bounds:
    return Bounds(apps=args.apps, perms=args.perms, grps=args.grps,
                  max_card=args.maxcard, budget=args.budget, seed=args.seed)


def _write(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        _sys.stdout.write(text)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def cmd_run(args) -> int:
    scenario = scenario_from_doc(json.loads(_read(args.scenario)))
    current = scenario.initial
    for i, action in enumerate(scenario.actions, 1):
        out = step(scenario.system_perms, current, action)
        if not out.ok:
            print(f"action {i}: {action.op} blocked (conjunct {out.failed_conjunct})",
                  file=_sys.stderr)
            return 1
        if action.op == "hasPermission":
            print(f"action {i}: hasPermission -> {'true' if out.result else 'false'}",
                  file=_sys.stderr)
        current = out.system
    _write(args, emit_state(current))
    return 0


def cmd_check(args) -> int:
    system = parse_state(_read(args.state))
    failing = set(check_clauses(system))
    if args.format == "json":
        doc = {"valid": not failing,
               "clauses": [{"id": c.id, "ok": c.id not in failing}
                           for c in standard_clauses()]}
        _write(args, json.dumps(doc, indent=2) + "\n")
    else:
        lines = [f"{c.id}: {'FAIL' if c.id in failing else 'ok'}"
                 for c in standard_clauses()]
        _write(args, "\n".join(lines) + "\n")
    return 1 if failing else 0


def cmd_verify(args) -> int:
    report = run_suite(args.suite, _bounds(args))
    if args.format == "json":
        _write(args, json.dumps(report.to_doc(), indent=2) + "\n")
    else:
        _write(args, report.text())
    if report.counterexamples:
        return 1
    if report.inconclusive:
        return 3
    return 0


def cmd_witness(args) -> int:
    name = args.property.removeprefix("sec/")
    queries = {q.prop.id: q for q in gen_security_queries()
               if q.kind == "existential"}
    if name not in queries:
        print(f"unknown existential property: {args.property!r} "
              f"(expected one of {sorted(queries)})", file=_sys.stderr)
        return 2
    verdict = check_query(queries[name], _bounds(args))
    doc = {"property": name, "bounds": _bounds(args).to_doc(),
           **verdict_to_doc(verdict)}
    if args.format == "json":
        _write(args, json.dumps(doc, indent=2) + "\n")
    else:
        mode = "exhaustive" if verdict.exhaustive else "sampled"
        lines = [f"property: {name}",
                 f"verdict: {verdict.kind} ({verdict.states_examined} states, {mode})"]
        if verdict.kind == "witness":
            lines.append("bindings: " + json.dumps(doc["bindings"]))
            lines.append("state:")
            lines.append(json.dumps(doc["state"], indent=2))
        _write(args, "\n".join(lines) + "\n")
    if verdict.kind == "witness":
        return 0
    if verdict.kind == "budget-exhausted":
        return 3
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permcheck",
        description="Executable Android-style permission model with a bounded verifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="fold a scenario's actions over its initial state")
    p.add_argument("scenario", help="scenario JSON file")
    _add_output_flags(p)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("check", help="evaluate every validity clause on a state")
    p.add_argument("state", help="state JSON file")
    _add_output_flags(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("verify", help="run a verification suite at bounds")
    p.add_argument("--suite", choices=SUITES, default="all")
    _add_bounds_flags(p)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("witness", help="search a witness for an existential property")
    p.add_argument("property")
    _add_bounds_flags(p)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_witness)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ParseError, json.JSONDecodeError, OSError, ValueError) as e:
        print(f"error: {e}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
