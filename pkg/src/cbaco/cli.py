"""Command-line front end.

Subcommands::

    validate POLICY                      check well-formedness
    query POLICY --p P --a A --r R       evaluate one access triple
    duties POLICY --events LOG           replay a log, report duty states
    simulate POLICY [--events LOG] [--strategy FILE]
    export POLICY [--format dot|json]    write the graph with visuals
    serve [--host H] [--port N]          run the HTTP service

Exit codes: 0 on success (grants and undetermined answers included),
1 when something is wrong with the policy or the answer is a denial or
a violated duty, 2 on usage or input errors.  ``--json`` switches any
subcommand's output to a machine-readable document on stdout.  Event
logs are JSON lines, one event per line; ``duties`` and ``simulate``
replay them against a fresh state (recorded history stripped first).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .obligations import SimulationState
from .policy import PolicyError, UnknownEntity, decide, extract_policy, validate
from .portgraph import GraphError
from .rules import builtin_rules
from .strategy import LocatedGraph, StrategyError, run_strategy
from .workspace import (
    HideRule,
    ParseError,
    ViewFilter,
    event_fields,
    export_dot,
    export_view,
    load_policy,
    query_duties,
)


def _read_policy(path: str):
    with open(path, "rb") as fh:
        return load_policy(fh.read())


def _read_events(path: str) -> list[dict]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                fields = event_fields(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{i + 1}: not a JSON event: {exc}") from exc
            except ParseError as exc:
                raise ParseError(f"{path}:{i + 1}: {exc}") from exc
            events.append(fields)
    return events


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, ensure_ascii=False) if args.json else text)


def cmd_validate(args) -> int:
    g = _read_policy(args.policy)
    violations = validate(g)
    payload = {
        "violations": [
            {"code": v.code, "message": v.message, "elements": list(v.elements)}
            for v in violations
        ]
    }
    if not violations:
        _emit(args, payload, "well-formed")
        return 0
    lines = [f"{v.code}: {v.message}" for v in violations]
    _emit(args, payload, "\n".join(lines))
    return 1


def cmd_query(args) -> int:
    g = _read_policy(args.policy)
    d = decide(g, args.p, args.a, args.r)
    if args.json:
        print(json.dumps(d.to_json_dict(), ensure_ascii=False))
    elif d.path is not None:
        print(f"{d.verdict}: " + " -> ".join(label for _, label in d.path))
    else:
        print(f"{d.verdict}: {d.justification}")
    return 1 if d.verdict == "deny" else 0


def _replayed(args) -> SimulationState:
    g = _read_policy(args.policy)
    state = SimulationState.fresh(g)
    if args.events:
        state, _ = state.replay(_read_events(args.events))
    return state


def cmd_duties(args) -> int:
    state = _replayed(args)
    rows = query_duties(state, principal=args.principal, status=args.state)
    if args.json:
        print(json.dumps({"duties": list(rows)}, ensure_ascii=False))
    elif not rows:
        print("no duties")
    else:
        for r in rows:
            closing = f", fulfilled by {r['fulfilling']}" if r["fulfilling"] else ""
            start = r["start"] if r["start"] is not None else "the outset"
            print(f"[{r['status']}] {r['principal']} must {r['action']} "
                  f"{r['resource']} (since {start}{closing})")
    return 1 if any(r["status"] == "violated" for r in rows) else 0


def cmd_simulate(args) -> int:
    state = _replayed(args)
    applied = []
    if args.strategy:
        with open(args.strategy, encoding="utf-8") as fh:
            script = fh.read()
        result = run_strategy(
            script, LocatedGraph.whole(state.graph), builtin_rules(),
            budget=args.budget, seed=args.seed)
        state = SimulationState(result.state.graph, state.duties)
        applied = [{"rule": s.rule, "match": s.match} for s in result.steps]
    violations = validate(state.graph)
    duties = [s.to_json_dict() for s in state.duty_states()]
    payload = {
        "events": len(state.history()),
        "steps": applied,
        "duties": duties,
        "violations": [
            {"code": v.code, "message": v.message} for v in violations
        ],
    }
    text = (f"{payload['events']} events, {len(applied)} rule applications, "
            f"{len(duties)} duties, {len(violations)} violations")
    _emit(args, payload, text)
    return 1 if violations else 0


def cmd_export(args) -> int:
    g = _read_policy(args.policy)
    view = ViewFilter(tuple(HideRule.parse(h) for h in args.hide))
    if args.format == "dot":
        out = export_dot(g, view)
    else:
        out = json.dumps(export_view(g, view), ensure_ascii=False, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_relations(args) -> int:
    g = _read_policy(args.policy)
    model = extract_policy(g)
    print(json.dumps(model.to_json_dict(), ensure_ascii=False, indent=2, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="cbaco", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("policy", help="policy document (.cbaco JSON)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("validate", help="check a policy for well-formedness")
    common(p)
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("query", help="evaluate one access triple")
    common(p)
    p.add_argument("--p", required=True, metavar="PRINCIPAL")
    p.add_argument("--a", required=True, metavar="ACTION")
    p.add_argument("--r", required=True, metavar="RESOURCE")
    p.set_defaults(run=cmd_query)

    p = sub.add_parser("duties", help="replay an event log and report duty states")
    common(p)
    p.add_argument("--events", metavar="LOG", help="JSON-lines event log")
    p.add_argument("--principal", help="only duties owed by this principal")
    p.add_argument("--state", choices=["pending", "fulfilled", "violated"])
    p.set_defaults(run=cmd_duties)

    p = sub.add_parser("simulate", help="replay events and/or run a strategy")
    common(p)
    p.add_argument("--events", metavar="LOG")
    p.add_argument("--strategy", metavar="FILE", help="strategy script to run")
    p.add_argument("--seed", type=int, help="make rule choices reproducible")
    p.add_argument("--budget", type=int, default=10_000,
                   help="rewriting step budget (default %(default)s)")
    p.set_defaults(run=cmd_simulate)

    p = sub.add_parser("export", help="write the graph with visual attributes")
    common(p)
    p.add_argument("--format", choices=["dot", "json"], default="json")
    p.add_argument("--hide", action="append", default=[], metavar="KIND:ATTR=VALUE",
                   help="hide matching elements (repeatable), e.g. node:type=E")
    p.add_argument("--output", "-o", metavar="FILE", help="write here instead of stdout")
    p.set_defaults(run=cmd_export)

    p = sub.add_parser("relations", help="print every relation the graph encodes")
    common(p)
    p.set_defaults(run=cmd_relations)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default=os.environ.get("CBACO_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("CBACO_PORT", "8040")))
    p.add_argument("--state-dir", metavar="DIR",
                   help="snapshot sessions here on shutdown and reload on start")
    p.set_defaults(run=cmd_serve)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, UnknownEntity) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PolicyError, GraphError, StrategyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
