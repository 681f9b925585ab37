"""Duty tracking over event histories.

Obligations attached to a principal's categories become concrete duties
once an event instantiates the obligation's start scheme (obligations
with no start scheme become duties immediately).  A duty closes at the
first later event that instantiates the end scheme with agreeing
variable bindings; the event that opens a duty never closes it.

A duty's state is judged against the current history:

* **fulfilled** — some event inside the duty's interval (inclusive at
  both ends; unbounded on the right while open) is the principal
  performing the obliged action on the obliged resource,
* **violated** — the interval closed without such an event,
* **pending** — the interval is open and no such event has happened.

The implicit start of every history sits before the first event, so a
duty with no start scheme is live from position zero.

:class:`SimulationState` is immutable: :meth:`SimulationState.inject`
returns a new state whose graph gained the event node, its links, and a
refreshed set of duty nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .policy import (
    OBLIGE_SHAPE, PolicyError, PolicyGraph, as_policy, duty_ent, edge_record,
    event_ent, match_pattern, matching_scheme_nodes, node_record, pr_ent,
    reachable_by, render_ent,
)
from .portgraph import BOT, Bottom, GraphBuilder, PortGraph, Record

PENDING, FULFILLED, VIOLATED = "pending", "fulfilled", "violated"


class TimeRegression(PolicyError):
    """An injected event is older than the history it would extend."""


class UnknownDuty(PolicyError):
    """A duty lookup names no tracked duty."""


@dataclass(frozen=True)
class DutyRecord:
    """One concrete duty: who owes what, and the interval bounds so far."""

    principal: str
    origin: tuple  # obligation payload: (action, resource, start scheme, end scheme)
    start: object  # event payload, or BOT for duties live from the outset
    bindings: tuple[tuple[str, object], ...] = ()
    end: object | None = None  # event payload once the duty has closed

    @property
    def action(self) -> str:
        return self.origin[0]

    @property
    def resource(self) -> str:
        return self.origin[1]

    def current_tuple(self) -> tuple:
        return duty_ent(self.principal, self.action, self.resource,
                        self.start, self.end if self.end is not None else BOT)

    @property
    def render(self) -> str:
        return render_ent("D", self.current_tuple())


@dataclass(frozen=True)
class DutyState:
    record: DutyRecord
    status: str
    fulfilling: object | None = None  # the first event that discharges the duty

    def to_json_dict(self) -> dict:
        return {
            "duty": self.record.render,
            "principal": self.record.principal,
            "action": self.record.action,
            "resource": self.record.resource,
            "status": self.status,
            "fulfilling": None if self.fulfilling is None else render_ent("E", self.fulfilling),
        }


@dataclass(frozen=True)
class DutyDelta:
    """What one injection did to the duty set."""

    created: tuple[DutyRecord, ...] = ()
    closed: tuple[DutyRecord, ...] = ()


def obligation_assignments(pg: PolicyGraph) -> set[tuple[str, tuple]]:
    """(principal, obligation payload) pairs the policy currently assigns."""
    out: set[tuple[str, tuple]] = set()
    for p in pg.nodes_of_type("P"):
        for o in reachable_by(pg, p, OBLIGE_SHAPE):
            out.add((str(pg.ent(p)), pg.ent(o)))  # type: ignore[arg-type]
    return out


def _fields_match_duty(fields: Mapping[str, object], record: DutyRecord) -> bool:
    return (fields.get("subj") == record.principal
            and fields.get("act") == record.action
            and fields.get("obj") == record.resource)


def duty_state(record: DutyRecord, history: Sequence[tuple]) -> DutyState:
    """Judge one duty against an ordered history of event payloads."""
    def pos(ent: object) -> int | None:
        if isinstance(ent, Bottom):
            return 0
        try:
            return list(history).index(ent) + 1
        except ValueError:
            return None

    start_pos = pos(record.start)
    if start_pos is None:
        return DutyState(record, PENDING)
    end_pos = pos(record.end) if record.end is not None else None
    closed = end_pos is not None and start_pos <= end_pos
    for k, ent in enumerate(history, start=1):
        if k < start_pos or (closed and k > end_pos):  # type: ignore[operator]
            continue
        if _fields_match_duty(dict(ent), record):
            return DutyState(record, FULFILLED, fulfilling=ent)
    return DutyState(record, VIOLATED if closed else PENDING)


def _scheme_bindings(scheme: object, fields: Mapping[str, object]) -> dict[str, object] | None:
    """Bindings under which the fields instantiate a scheme payload."""
    if isinstance(scheme, Bottom):
        return None
    return match_pattern(scheme[2], fields)  # type: ignore[index]


def _bindings_agree(a: tuple[tuple[str, object], ...], b: Mapping[str, object]) -> bool:
    known = dict(a)
    return all(known[k] == v for k, v in b.items() if k in known)


@dataclass(frozen=True)
class SimulationState:
    """A policy graph plus the duties being tracked against its history."""

    graph: PortGraph
    duties: tuple[DutyRecord, ...] = ()

    # -- construction --------------------------------------------------

    @classmethod
    def fresh(cls, policy: PortGraph) -> "SimulationState":
        """Start with the policy's rules but none of its recorded past.

        Event and duty nodes are stripped; obligations with no start
        scheme immediately yield pending duties.
        """
        pg = as_policy(policy)
        gb = GraphBuilder.from_graph(policy)
        for n in (*pg.nodes_of_type("E"), *pg.nodes_of_type("D")):
            gb.remove_node_cascade(n)
        bare = gb.finish()
        records = tuple(sorted(
            (DutyRecord(p, origin, BOT)
             for p, origin in obligation_assignments(as_policy(bare))
             if isinstance(origin[2], Bottom)),
            key=repr,
        ))
        return cls(_materialize_duty_nodes(bare, records), records)

    @classmethod
    def resume(cls, policy: PortGraph) -> "SimulationState":
        """Adopt a graph as it stands; only duties created from now on are tracked."""
        return cls(policy, ())

    # -- reading ---------------------------------------------------------

    def policy_view(self) -> PolicyGraph:
        return as_policy(self.graph)

    def history(self) -> tuple[tuple, ...]:
        """Event payloads of the active history, oldest first."""
        pg = self.policy_view()
        tip = _tip(pg)
        if tip is None:
            return ()
        chain = [tip]
        while True:
            preds = [
                tail
                for e in pg.node_edges(chain[-1], token="EE")
                for tail, head in pg.orientations(e)
                if head == chain[-1]
            ]
            if not preds:
                break
            if len(preds) > 1:
                raise PolicyError("the history is not a chain")
            chain.append(preds[0])
        return tuple(pg.ent(n) for n in reversed(chain))  # type: ignore[misc]

    def duty_states(self) -> tuple[DutyState, ...]:
        h = self.history()
        return tuple(duty_state(r, h) for r in self.duties)

    def state_of(self, duty: DutyRecord | tuple) -> DutyState:
        key = duty.current_tuple() if isinstance(duty, DutyRecord) else tuple(duty)
        for r in self.duties:
            if r.current_tuple() == key:
                return duty_state(r, self.history())
        raise UnknownDuty(f"no tracked duty {render_ent('D', key)}")

    # -- writing ---------------------------------------------------------

    def inject(self, fields: Mapping[str, object]) -> tuple["SimulationState", DutyDelta]:
        """Record one new event; returns the next state and the duty changes."""
        pg = self.policy_view()
        ent = event_ent(fields)
        if pg.find_node("E", ent) is not None:
            raise PolicyError(f"event {render_ent('E', ent)} is already recorded")
        tip = _tip(pg)
        _check_time(pg, tip, fields)

        gb = GraphBuilder.from_graph(self.graph)
        old_now = pg.now_event()
        if old_now is not None:
            gb.set_record(old_now, pg.graph.node_record(old_now).replace(now=False))
        n = gb.add_node(node_record("E", ent, now=True))
        ports = {name: gb.add_port(n, Record(Name=name)) for name in ("Main", "In", "Out")}
        if tip is not None:
            gb.add_edge(pg.port(tip, "Out"), ports["In"], edge_record("EE"))
        for field_name, typ, token in (("subj", "P", "EP"), ("act", "A", "EA"), ("obj", "R", "ER")):
            v = fields.get(field_name)
            target = pg.find_node(typ, v) if isinstance(v, str) else None
            if target is not None:
                gb.add_edge(ports["Main"], pg.port(target, "Main"), edge_record(token))
        for g in matching_scheme_nodes(pg, fields):
            gb.add_edge(ports["Main"], pg.port(g, "Main"), edge_record("EG"))

        closed: list[DutyRecord] = []
        kept: list[DutyRecord] = []
        for r in self.duties:
            if r.end is None and not isinstance(r.origin[3], Bottom) and r.start != ent:
                delta = _scheme_bindings(r.origin[3], fields)
                if delta is not None and _bindings_agree(r.bindings, delta):
                    closed.append(replace(r, end=ent))
                    continue
            kept.append(r)

        created: list[DutyRecord] = []
        for p, origin in sorted(obligation_assignments(pg), key=repr):
            beta = _scheme_bindings(origin[2], fields)
            if beta is not None:
                created.append(DutyRecord(
                    p, origin, ent, bindings=tuple(sorted(beta.items()))))

        records = tuple(kept) + tuple(closed) + tuple(created)
        graph = _materialize_duty_nodes(gb.finish(), records)
        return (
            SimulationState(graph, records),
            DutyDelta(created=tuple(created), closed=tuple(closed)),
        )

    def replay(self, events: Iterable[Mapping[str, object]]) -> tuple["SimulationState", list[DutyDelta]]:
        state, deltas = self, []
        for fields in events:
            state, delta = state.inject(fields)
            deltas.append(delta)
        return state, deltas


def _tip(pg: PolicyGraph) -> int | None:
    """The event the next injection chains from: the end of the current history."""
    def successors(n: int) -> list[int]:
        return [
            head
            for e in pg.node_edges(n, token="EE")
            for tail, head in pg.orientations(e)
            if tail == n
        ]

    now = pg.now_event()
    if now is not None:
        seen = {now}
        node = now
        while True:
            nxt = [m for m in successors(node) if m not in seen]
            if not nxt:
                return node
            if len(nxt) > 1:
                raise PolicyError("the history branches after the current event")
            node = nxt[0]
            seen.add(node)
    events = pg.nodes_of_type("E")
    if not events:
        return None
    tips = [n for n in events if not successors(n)]
    if len(tips) != 1:
        raise PolicyError("several histories and no current event to pick one")
    return tips[0]


def _check_time(pg: PolicyGraph, tip: int | None, fields: Mapping[str, object]) -> None:
    new_time = fields.get("time")
    if not isinstance(new_time, (int, float)) or isinstance(new_time, bool):
        return
    floor: list[float] = []
    for n in (pg.now_event(), tip):
        if n is None:
            continue
        t = dict(pg.ent(n)).get("time")  # type: ignore[arg-type]
        if isinstance(t, (int, float)) and not isinstance(t, bool):
            floor.append(t)
    if floor and new_time < max(floor):
        raise TimeRegression(
            f"event time {new_time} precedes the history's time {max(floor)}")


def _materialize_duty_nodes(graph: PortGraph, records: Iterable[DutyRecord]) -> PortGraph:
    """Make the graph's duty nodes mirror the tracked records exactly."""
    pg = as_policy(graph)
    target = {r.current_tuple() for r in records}
    existing = {pg.ent(d): d for d in pg.nodes_of_type("D")}
    stale = [n for ent, n in existing.items() if ent not in target]
    missing = sorted(target - set(existing), key=repr)
    if not stale and not missing:
        return graph
    gb = GraphBuilder.from_graph(graph)
    for n in stale:
        gb.remove_node_cascade(n)
    for tup in missing:
        p, a, r, e1, e2 = tup
        d = gb.add_node(node_record("D", tup))
        main = gb.add_port(d, Record(Name="Main"))
        p_node = pg.find_node("P", p)
        pr_node = pg.find_node("Pr", pr_ent(a, r))
        if p_node is None or pr_node is None:
            raise PolicyError(f"duty {render_ent('D', tup)} references entities the graph lacks")
        gb.add_edge(main, pg.port(p_node, "Main"), edge_record("DP"))
        gb.add_edge(main, pg.port(pr_node, "Main"), edge_record("DPr"))
        for ev, tag in ((e1, "i"), (e2, "f")):
            if isinstance(ev, Bottom):
                continue
            e_node = pg.find_node("E", ev)
            if e_node is None:
                raise PolicyError(f"duty {render_ent('D', tup)} references an unrecorded event")
            gb.add_edge(main, pg.port(e_node, "Main"), edge_record("DE", ev=tag))
    return gb.finish()
