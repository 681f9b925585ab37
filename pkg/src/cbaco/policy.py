"""Access-control policies as typed port graphs.

A policy graph has nine node types:

* ``P`` principals, ``C`` categories, ``A`` actions, ``R`` resources,
* ``Pr`` action/resource pairs,
* ``O`` obligations: a pair plus optional start/end event schemes,
* ``G`` event schemes, ``E`` events, ``D`` duties.

Every node stores its payload in an ``ent`` attribute and exposes a
``Main`` port; categories, events and schemes also expose ``In``/``Out``
ports that encode edge direction (sub-category ``Out`` to super-category
``In``, earlier event ``Out`` to later event ``In``, specific scheme
``Out`` to general scheme ``In``).

Seventeen edge types wire these together; all edge records carry
``type`` and ``aux``.  Auxiliary edges (``aux=True``) are scratch
material written by rewrite rules and are invisible to validation,
extraction and decisions.

The module offers:

* :class:`PolicyBuilder` — convenient construction with the encoding
  conventions applied,
* :func:`validate` — structural well-formedness diagnostics,
* :func:`extract_policy` — the relational reading of a graph
  (assignments, authorizations, bans, obligations, event typing, ...),
* :func:`decide` — grant/ban/undetermined for one access triple, with a
  witnessing path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .portgraph import BOT, Bottom, GraphBuilder, PortGraph, Record, Var


class PolicyError(Exception):
    """Base class for policy-level failures."""


class UnknownEntity(PolicyError):
    """A query names a principal, action or resource the policy lacks."""


class NotWellFormed(PolicyError):
    """The graph violates the policy encoding; ``violations`` lists why."""

    def __init__(self, violations: list["Violation"]):
        msgs = "; ".join(v.message for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(msgs + more)
        self.violations = violations


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    elements: tuple[int, ...] = ()


# ----------------------------------------------------------------------
# Node and edge vocabulary
# ----------------------------------------------------------------------

NODE_TYPES = ("P", "C", "A", "R", "Pr", "O", "D", "E", "G")

NODE_PORTS: dict[str, tuple[str, ...]] = {
    "P": ("Main",), "A": ("Main",), "R": ("Main",),
    "Pr": ("Main",), "O": ("Main",), "D": ("Main",),
    "C": ("Main", "In", "Out"),
    "E": ("Main", "In", "Out"),
    "G": ("Main", "In", "Out"),
}

# token -> (endpoint node types, extra attribute -> allowed values)
EDGE_ENDS: dict[str, tuple[str, str]] = {
    "PC": ("P", "C"), "CC": ("C", "C"), "CPr": ("C", "Pr"), "CO": ("C", "O"),
    "PrA": ("Pr", "A"), "PrR": ("Pr", "R"), "OPr": ("O", "Pr"), "OG": ("O", "G"),
    "DP": ("D", "P"), "DPr": ("D", "Pr"), "DE": ("D", "E"),
    "EE": ("E", "E"), "EP": ("E", "P"), "EA": ("E", "A"), "ER": ("E", "R"),
    "EG": ("E", "G"), "GG": ("G", "G"),
}

EDGE_ATTRS: dict[str, dict[str, tuple]] = {
    "CC": {"auth": (True, False), "obl": (True, False)},
    "CPr": {"auth": ("A", "B")},
    "OG": {"ge": ("i", "f")},
    "DE": {"ev": ("i", "f")},
}

DIRECTED = ("CC", "EE", "GG")  # Out-side is the tail, In-side the head


def node_record(typ: str, ent: object, now: bool | None = None) -> Record:
    if typ == "E":
        return Record(Name="E", type="E", ent=ent, now=bool(now))
    return Record(Name=typ, type=typ, ent=ent)


def edge_record(token: str, aux: bool = False, **attrs: object) -> Record:
    base: dict[str, object] = {"Name": token, "type": token, "aux": aux}
    spec = EDGE_ATTRS.get(token, {})
    for key, allowed in spec.items():
        if key not in attrs:
            raise PolicyError(f"{token} edge needs attribute {key!r}")
        if attrs[key] not in allowed:
            raise PolicyError(f"{token} edge attribute {key}={attrs[key]!r} not in {allowed}")
        base[key] = attrs[key]
    extra = set(attrs) - set(spec)
    if extra:
        raise PolicyError(f"{token} edge does not take attributes {sorted(extra)}")
    return Record(base)


# ----------------------------------------------------------------------
# Entity payloads
# ----------------------------------------------------------------------


def event_ent(fields: Mapping[str, object]) -> tuple:
    """Events are identified by their full field map, order-independent."""
    return tuple(sorted(fields.items()))


def scheme_ent(name: str, args: Iterable[str], pattern: Mapping[str, object]) -> tuple:
    """Schemes: a name, its argument list, and a field pattern (may hold variables)."""
    return (name, tuple(args), tuple(sorted(pattern.items())))


def pr_ent(action: str, resource: str) -> tuple:
    return (action, resource)


def obligation_ent(action: str, resource: str, start: object, end: object) -> tuple:
    """Start/end are scheme payloads or ``BOT`` when the bound is absent."""
    return (action, resource, start, end)


def duty_ent(principal: str, action: str, resource: str, start: object, end: object) -> tuple:
    """Start/end are event payloads or ``BOT``."""
    return (principal, action, resource, start, end)


def match_pattern(pattern: Iterable[tuple[str, object]] | Mapping[str, object],
                  fields: Mapping[str, object]) -> dict[str, object] | None:
    """Unify a scheme pattern against event fields.

    Every pattern entry must appear in the fields; variables bind on
    first use and must stay consistent.  Extra event fields are fine.
    Returns the bindings, or ``None`` when the pattern does not apply.
    """
    items = pattern.items() if isinstance(pattern, Mapping) else pattern
    bindings: dict[str, object] = {}
    for k, v in items:
        if k not in fields:
            return None
        fv = fields[k]
        if isinstance(v, Var):
            if v.name in bindings:
                if bindings[v.name] != fv:
                    return None
            else:
                bindings[v.name] = fv
        elif v != fv:
            return None
    return bindings


def matching_scheme_nodes(pg: "PolicyGraph", fields: Mapping[str, object]) -> list[int]:
    """Scheme nodes the fields instantiate, keeping only the most specific.

    A scheme is dropped when a strictly more specific matching scheme
    reaches it through the hierarchy; of mutually-general matching
    schemes only the lowest-numbered survives.
    """
    hits = [n for n in pg.nodes_of_type("G")
            if match_pattern(pg.ent(n)[2], fields) is not None]  # type: ignore[index]
    pairs = {
        (tail, head)
        for e in pg.edges_of_type("GG")
        for tail, head in pg.orientations(e)
    }
    closure = _transitive(pairs)
    return [
        n for n in hits
        if not any(
            m != n and (m, n) in closure and ((n, m) not in closure or m < n)
            for m in hits)
    ]


def render_ent(kind: str, ent: object) -> str:
    """Canonical human-readable form of a node payload."""
    if isinstance(ent, Bottom):
        return "⊥"
    if kind in ("P", "C", "A", "R"):
        return str(ent)
    if kind == "Pr":
        a, r = ent  # type: ignore[misc]
        return f"({a}, {r})"
    if kind == "G":
        name, args, _pattern = ent  # type: ignore[misc]
        return f"{name}[{', '.join(args)}]"
    if kind == "E":
        parts = ", ".join(f"{k}: {v}" for k, v in ent)  # type: ignore[union-attr]
        return "{" + parts + "}"
    if kind == "O":
        a, r, g1, g2 = ent  # type: ignore[misc]
        return f"({a}, {r}, {render_ent('G', g1)}, {render_ent('G', g2)})"
    if kind == "D":
        p, a, r, e1, e2 = ent  # type: ignore[misc]
        return f"({p}, {a}, {r}, {render_ent('E', e1)}, {render_ent('E', e2)})"
    raise PolicyError(f"unknown entity kind {kind!r}")


@dataclass(frozen=True)
class EntityRef:
    """A typed reference to one policy entity."""

    kind: str
    payload: object

    @property
    def render(self) -> str:
        return render_ent(self.kind, self.payload)


# ----------------------------------------------------------------------
# Graph view
# ----------------------------------------------------------------------


class PolicyGraph:
    """Typed read access over a policy-encoded port graph."""

    def __init__(self, graph: PortGraph):
        self.graph = graph

    @cached_property
    def _nodes_by_type(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {t: [] for t in NODE_TYPES}
        for n in self.graph.nodes:
            t = self.graph.node_record(n).get("type")
            if t in out:
                out[t].append(n)  # type: ignore[index]
        return {t: tuple(ns) for t, ns in out.items()}

    def nodes_of_type(self, typ: str) -> tuple[int, ...]:
        return self._nodes_by_type.get(typ, ())

    def node_type(self, n: int) -> str:
        return str(self.graph.node_record(n)["type"])

    def ent(self, n: int) -> object:
        return self.graph.node_record(n)["ent"]

    def ref(self, n: int) -> EntityRef:
        return EntityRef(self.node_type(n), self.ent(n))

    @cached_property
    def _node_index(self) -> dict[tuple[str, object], int]:
        out: dict[tuple[str, object], int] = {}
        for t in NODE_TYPES:
            for n in self.nodes_of_type(t):
                out.setdefault((t, self.ent(n)), n)
        return out

    def find_node(self, typ: str, ent: object) -> int | None:
        return self._node_index.get((typ, ent))

    def require_node(self, typ: str, ent: object) -> int:
        n = self.find_node(typ, ent)
        if n is None:
            raise UnknownEntity(f"no {typ} entity {render_ent(typ, ent)}")
        return n

    def port(self, n: int, name: str) -> int:
        for p in self.graph.node_ports(n):
            if self.graph.port_record(p).name == name:
                return p
        raise NotWellFormed([Violation(
            "bad-shape", f"node {n} has no {name} port", (n,))])

    def edge_type(self, e: int) -> str:
        return str(self.graph.edge_record(e)["type"])

    def is_aux(self, e: int) -> bool:
        return bool(self.graph.edge_record(e).get("aux", False))

    def edges_of_type(self, token: str, include_aux: bool = False) -> tuple[int, ...]:
        return tuple(
            e for e in self.graph.edges
            if self.edge_type(e) == token and (include_aux or not self.is_aux(e))
        )

    def edge_nodes(self, e: int) -> tuple[int, int]:
        a, b = self.graph.edge_ports(e)
        return self.graph.port_node(a), self.graph.port_node(b)

    def typed_ends(self, e: int) -> tuple[int, int]:
        """Endpoints ordered as the edge type's (first, second) node types."""
        token = self.edge_type(e)
        t1, t2 = EDGE_ENDS[token]
        na, nb = self.edge_nodes(e)
        if self.node_type(na) == t1 and self.node_type(nb) == t2:
            if t1 == t2:
                # same-type edges: order by direction when there is one
                for tail, head in self.orientations(e):
                    return tail, head
            return na, nb
        return nb, na

    def orientations(self, e: int) -> tuple[tuple[int, int], ...]:
        """(tail, head) node pairs for a direction-capable edge.

        ``Out`` to ``In`` attachment yields one orientation; an edge
        connected through two ``Main`` ports stands for both directions.
        """
        a, b = self.graph.edge_ports(e)
        na, nb = self.graph.port_node(a), self.graph.port_node(b)
        name_a = self.graph.port_record(a).name
        name_b = self.graph.port_record(b).name
        if name_a == "Out" and name_b == "In":
            return ((na, nb),)
        if name_a == "In" and name_b == "Out":
            return ((nb, na),)
        return ((na, nb), (nb, na))

    def node_edges(self, n: int, token: str | None = None, include_aux: bool = False) -> tuple[int, ...]:
        seen: list[int] = []
        for p in self.graph.node_ports(n):
            for e in self.graph.port_edges(p):
                if e in seen:
                    continue
                if token is not None and self.edge_type(e) != token:
                    continue
                if not include_aux and self.is_aux(e):
                    continue
                seen.append(e)
        return tuple(sorted(seen))

    def now_event(self) -> int | None:
        marked = [n for n in self.nodes_of_type("E") if self.graph.node_record(n).get("now")]
        return marked[0] if marked else None

    def render_node(self, n: int) -> str:
        return self.ref(n).render


def as_policy(g: PortGraph | PolicyGraph) -> PolicyGraph:
    return g if isinstance(g, PolicyGraph) else PolicyGraph(g)


# ----------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------


class PolicyBuilder:
    """Build policy graphs without spelling out ports and records by hand."""

    def __init__(self) -> None:
        self.b = GraphBuilder()
        self._index: dict[tuple[str, object], int] = {}
        self._ports: dict[tuple[int, str], int] = {}
        self._edge_seen: set[tuple] = set()

    # -- nodes ---------------------------------------------------------

    def _add_node(self, typ: str, ent: object, now: bool = False) -> int:
        key = (typ, ent)
        if key in self._index:
            raise PolicyError(f"duplicate {typ} entity {render_ent(typ, ent)}")
        n = self.b.add_node(node_record(typ, ent, now if typ == "E" else None))
        for pname in NODE_PORTS[typ]:
            self._ports[(n, pname)] = self.b.add_port(n, Record(Name=pname))
        self._index[key] = n
        return n

    def _get(self, typ: str, ent: object) -> int:
        key = (typ, ent)
        if key not in self._index:
            raise UnknownEntity(f"no {typ} entity {render_ent(typ, ent)}")
        return self._index[key]

    def port(self, n: int, name: str) -> int:
        return self._ports[(n, name)]

    def principal(self, name: str) -> int:
        return self._add_node("P", name)

    def category(self, name: str) -> int:
        return self._add_node("C", name)

    def action(self, name: str) -> int:
        return self._add_node("A", name)

    def resource(self, name: str) -> int:
        return self._add_node("R", name)

    def scheme(self, name: str, args: Iterable[str], pattern: Mapping[str, object]) -> int:
        return self._add_node("G", scheme_ent(name, args, pattern))

    def event(self, fields: Mapping[str, object], now: bool = False) -> int:
        return self._add_node("E", event_ent(fields), now=now)

    def pr(self, action: str, resource: str) -> int:
        """Action/resource pair node (created on first use, then shared)."""
        ent = pr_ent(action, resource)
        existing = self._index.get(("Pr", ent))
        if existing is not None:
            return existing
        a = self._get("A", action)
        r = self._get("R", resource)
        n = self._add_node("Pr", ent)
        self._edge(n, "Main", a, "Main", edge_record("PrA"))
        self._edge(n, "Main", r, "Main", edge_record("PrR"))
        return n

    def obligation(self, action: str, resource: str,
                   start: int | None = None, end: int | None = None) -> int:
        """Obligation node over a pair, bounded by scheme nodes (or nothing)."""
        g1 = self.node_ent(start) if start is not None else BOT
        g2 = self.node_ent(end) if end is not None else BOT
        ent = obligation_ent(action, resource, g1, g2)
        existing = self._index.get(("O", ent))
        if existing is not None:
            return existing
        pr = self.pr(action, resource)
        n = self._add_node("O", ent)
        self._edge(n, "Main", pr, "Main", edge_record("OPr"))
        if start is not None:
            self._edge(n, "Main", start, "Main", edge_record("OG", ge="i"))
        if end is not None:
            self._edge(n, "Main", end, "Main", edge_record("OG", ge="f"))
        return n

    def duty(self, principal: str, action: str, resource: str,
             start: int | None = None, end: int | None = None) -> int:
        """Duty node for a principal; start/end are event nodes or nothing."""
        e1 = self.node_ent(start) if start is not None else BOT
        e2 = self.node_ent(end) if end is not None else BOT
        ent = duty_ent(principal, action, resource, e1, e2)
        existing = self._index.get(("D", ent))
        if existing is not None:
            return existing
        p = self._get("P", principal)
        pr = self.pr(action, resource)
        n = self._add_node("D", ent)
        self._edge(n, "Main", p, "Main", edge_record("DP"))
        self._edge(n, "Main", pr, "Main", edge_record("DPr"))
        if start is not None:
            self._edge(n, "Main", start, "Main", edge_record("DE", ev="i"))
        if end is not None:
            self._edge(n, "Main", end, "Main", edge_record("DE", ev="f"))
        return n

    def node_ent(self, n: int) -> object:
        return self.b.get_record(n)["ent"]

    # -- edges -----------------------------------------------------------

    def _edge(self, n1: int, port1: str, n2: int, port2: str, rec: Record) -> int:
        key = (rec["type"], n1, port1, n2, port2, rec.items())
        if key in self._edge_seen:
            raise PolicyError(f"duplicate {rec['type']} edge between {n1} and {n2}")
        self._edge_seen.add(key)
        return self.b.add_edge(self._ports[(n1, port1)], self._ports[(n2, port2)], rec)

    def pc(self, principal: str, category: str) -> int:
        p = self._get("P", principal)
        c = self._get("C", category)
        return self._edge(p, "Main", c, "Main", edge_record("PC"))

    def cc(self, sub: str, super_: str, auth: bool = False, obl: bool = False,
           bidirectional: bool = False) -> int:
        """Category subsumption: ``sub`` is below ``super_``.

        ``auth``/``obl`` say which of the two orders the edge asserts.
        A bidirectional edge (attached Main-to-Main) makes the two
        categories subsume each other.
        """
        if not auth and not obl:
            raise PolicyError("a CC edge must assert auth, obl or both")
        c1 = self._get("C", sub)
        c2 = self._get("C", super_)
        rec = edge_record("CC", auth=auth, obl=obl)
        if bidirectional:
            return self._edge(c1, "Main", c2, "Main", rec)
        return self._edge(c1, "Out", c2, "In", rec)

    def grant(self, category: str, action: str, resource: str) -> int:
        c = self._get("C", category)
        pr = self.pr(action, resource)
        return self._edge(c, "Main", pr, "Main", edge_record("CPr", auth="A"))

    def forbid(self, category: str, action: str, resource: str) -> int:
        c = self._get("C", category)
        pr = self.pr(action, resource)
        return self._edge(c, "Main", pr, "Main", edge_record("CPr", auth="B"))

    def require(self, category: str, obligation_node: int) -> int:
        c = self._get("C", category)
        return self._edge(c, "Main", obligation_node, "Main", edge_record("CO"))

    def gg(self, specific: int, general: int) -> int:
        return self._edge(specific, "Out", general, "In", edge_record("GG"))

    def ee(self, earlier: int, later: int) -> int:
        return self._edge(earlier, "Out", later, "In", edge_record("EE"))

    # -- derived edges ---------------------------------------------------

    def link_event(self, e: int) -> None:
        """Connect an event to the principal/action/resource its fields name."""
        fields = dict(self.node_ent(e))  # type: ignore[arg-type]
        for field_name, typ, token in (("subj", "P", "EP"), ("act", "A", "EA"), ("obj", "R", "ER")):
            v = fields.get(field_name)
            if isinstance(v, str) and (typ, v) in self._index:
                self._edge(e, "Main", self._index[(typ, v)], "Main", edge_record(token))

    def synthesize_eg(self) -> None:
        """Type every event against the most specific schemes that match it.

        Generalizations of a matching scheme are reachable through the
        scheme hierarchy, so direct edges to them would be redundant.
        """
        snapshot = PolicyGraph(self.b.finish())
        for e in sorted(snapshot.nodes_of_type("E")):
            fields = dict(snapshot.ent(e))  # type: ignore[arg-type]
            for g in matching_scheme_nodes(snapshot, fields):
                self._edge(e, "Main", g, "Main", edge_record("EG"))

    def finish(self) -> PortGraph:
        return self.b.finish()


def _transitive(pairs: Iterable[tuple]) -> set[tuple]:
    out = set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(out):
            for c, d in list(out):
                if b == c and (a, d) not in out:
                    out.add((a, d))
                    changed = True
    return out


# ----------------------------------------------------------------------
# Constrained path search
# ----------------------------------------------------------------------

FWD, BWD, ANY, BOTH = "fwd", "bwd", "any", "both"


@dataclass(frozen=True)
class Step:
    """One step of a path pattern: an edge type, a direction, attributes."""

    token: str
    direction: str = ANY
    attrs: tuple[tuple[str, object], ...] = ()
    many: bool = False


def step(token: str, direction: str = ANY, many: bool = False, **attrs: object) -> Step:
    return Step(token, direction, tuple(sorted(attrs.items())), many)


GRANT_SHAPE = (step("PC"), step("CC", FWD, many=True, auth=True), step("CPr", auth="A"))
BAN_SHAPE = (step("PC"), step("CC", BWD, many=True, auth=True), step("CPr", auth="B"))
OBLIGE_SHAPE = (step("PC"), step("CC", FWD, many=True, obl=True), step("CO"))
TYPING_SHAPE = (step("EG"), step("GG", FWD, many=True))


def find_paths(
    pg: PolicyGraph,
    start: int,
    pattern: tuple[Step, ...],
    exclude_edge: int | None = None,
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Node-simple paths from ``start`` whose edges spell the pattern.

    Yields ``(nodes, edges)`` pairs in a deterministic order; auxiliary
    edges never participate.  A starred step may be taken any number of
    times (including zero).
    """

    def moves(n: int, s: Step) -> Iterator[tuple[int, int]]:
        for e in pg.node_edges(n, token=s.token):
            if e == exclude_edge:
                continue
            rec = pg.graph.edge_record(e)
            if any(rec.get(k) != v for k, v in s.attrs):
                continue
            if s.direction == ANY:
                na, nb = pg.edge_nodes(e)
                other = nb if na == n else na
                yield e, other
            elif s.direction == BOTH:
                # only edges standing for both directions at once
                if len(pg.orientations(e)) == 2:
                    na, nb = pg.edge_nodes(e)
                    yield e, nb if na == n else na
            else:
                for tail, head in pg.orientations(e):
                    if s.direction == FWD and tail == n:
                        yield e, head
                    elif s.direction == BWD and head == n:
                        yield e, tail

    def walk(n: int, idx: int, nodes: tuple[int, ...], edges: tuple[int, ...]
             ) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        if idx == len(pattern):
            yield nodes, edges
            return
        s = pattern[idx]
        if s.many:
            yield from walk(n, idx + 1, nodes, edges)
        for e, nxt in moves(n, s):
            if nxt in nodes:
                continue
            if s.many:
                yield from walk(nxt, idx, nodes + (nxt,), edges + (e,))
            else:
                yield from walk(nxt, idx + 1, nodes + (nxt,), edges + (e,))

    yield from walk(start, 0, (start,), ())


def reachable_by(pg: PolicyGraph, start: int, pattern: tuple[Step, ...],
                 exclude_edge: int | None = None) -> dict[int, tuple[tuple[int, ...], tuple[int, ...]]]:
    """First witnessing path per reachable end node."""
    out: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
    for nodes, edges in find_paths(pg, start, pattern, exclude_edge):
        out.setdefault(nodes[-1], (nodes, edges))
    return out


# ----------------------------------------------------------------------
# Path words
# ----------------------------------------------------------------------

# A path is described by the word of its edge types.  Directed edges
# carry an arrow for the traversal sense (→CC follows the edge, ←CC goes
# against it, ↔CC is a two-way edge), attribute-bearing edges carry the
# attribute as a superscript: CPrᴬ CPrᴮ OGⁱ OGᶠ DEⁱ DEᶠ.

_SUPERSCRIPTS = {"A": "ᴬ", "B": "ᴮ", "i": "ⁱ", "f": "ᶠ"}
_FLAGGED = {"CPr": "auth", "OG": "ge", "DE": "ev"}


class NotAPath(PolicyError):
    """The node sequence does not spell a path of the graph."""


def _token_rendered(pg: PolicyGraph, e: int, tail: int, head: int) -> str:
    token = pg.edge_type(e)
    if token in DIRECTED:
        orients = pg.orientations(e)
        if len(orients) == 2:
            return f"↔{token}"
        return f"→{token}" if orients[0] == (tail, head) else f"←{token}"
    if token in _FLAGGED:
        flag = pg.graph.edge_record(e)[_FLAGGED[token]]
        return f"{token}{_SUPERSCRIPTS[flag]}"
    return token


def path_type(g: PortGraph | PolicyGraph, nodes: Sequence[int],
              edges: Sequence[int] | None = None) -> str:
    """The type word a node sequence spells, e.g. ``"PC, →CC, CPrᴬ"``.

    When consecutive nodes are joined by parallel edges that would read
    differently, the word is ambiguous and the edge sequence must be
    given explicitly.
    """
    pg = as_policy(g)
    if not nodes:
        raise NotAPath("a path has at least one node")
    if len(set(nodes)) != len(nodes):
        raise NotAPath("path nodes must be pairwise distinct")
    for n in nodes:
        if n not in pg.graph.nodes:
            raise NotAPath(f"no node {n} in the graph")
    if edges is not None and len(edges) != len(nodes) - 1:
        raise NotAPath(f"{len(nodes)} nodes need {len(nodes) - 1} edges, got {len(edges)}")

    word = []
    for i, (a, b) in enumerate(zip(nodes, nodes[1:])):
        if edges is not None:
            e = edges[i]
            if e not in pg.graph.edges or set(pg.edge_nodes(e)) != {a, b}:
                raise NotAPath(f"edge {e} does not join nodes {a} and {b}")
            word.append(_token_rendered(pg, e, a, b))
            continue
        joining = [e for e in pg.node_edges(a) if set(pg.edge_nodes(e)) == {a, b}]
        if not joining:
            raise NotAPath(f"nodes {a} and {b} are not adjacent")
        readings = {_token_rendered(pg, e, a, b) for e in joining}
        if len(readings) > 1:
            raise NotAPath(
                f"ambiguous: nodes {a} and {b} are joined by parallel edges "
                f"reading {sorted(readings)}; pass the edge sequence explicitly")
        word.append(readings.pop())
    return ", ".join(word)


def _parse_type_word(pattern: str) -> tuple[Step, ...]:
    steps = []
    for raw in pattern.split(","):
        item = raw.strip()
        many = False
        if item.startswith("(") and item.endswith(")*"):
            many = True
            item = item[1:-2].strip()
        direction = ANY
        if item[:1] in ("→", "←", "↔"):
            direction = {"→": FWD, "←": BWD, "↔": BOTH}[item[0]]
            item = item[1:]
        attrs: dict[str, object] = {}
        for flag, sup in _SUPERSCRIPTS.items():
            if item.endswith(sup):
                item = item[: -len(sup)]
                if item not in _FLAGGED:
                    raise PolicyError(f"edge type {item!r} takes no {flag!r} mark")
                attrs[_FLAGGED[item]] = flag
        if item not in EDGE_ENDS:
            raise PolicyError(f"unknown edge type {item!r} in path pattern")
        if direction != ANY and item not in DIRECTED:
            raise PolicyError(f"edge type {item!r} has no direction to follow")
        steps.append(Step(item, direction, tuple(sorted(attrs.items())), many))
    return tuple(steps)


def constrained_paths(g: PortGraph | PolicyGraph, start: int, pattern: str,
                      inverse: bool = False) -> list[tuple[int, ...]]:
    """Node sequences from ``start`` whose type word matches the pattern.

    The pattern is a comma-separated type word whose items may be
    starred, e.g. ``"PC, (→CC)*, CPrᴬ"``.  Arrows constrain the
    traversal sense of directed edges; ``inverse=True`` flips every
    arrow, turning a constrained pattern into its inverse reading.
    """
    pg = as_policy(g)
    if start not in pg.graph.nodes:
        raise UnknownEntity(f"no node {start} in the graph")
    steps = _parse_type_word(pattern)
    if inverse:
        flip = {FWD: BWD, BWD: FWD}
        steps = tuple(
            Step(s.token, flip.get(s.direction, s.direction), s.attrs, s.many)
            for s in steps
        )
    return [nodes for nodes, _ in find_paths(pg, start, steps)]


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------


def validate(g: PortGraph | PolicyGraph) -> list[Violation]:
    """All well-formedness violations of a policy graph (aux edges ignored)."""
    pg = as_policy(g)
    out: list[Violation] = []
    out += _check_nodes(pg)
    out += _check_edge_structure(pg)
    out += _check_edge_duplicates(pg)
    out += _check_payload_consistency(pg)
    out += find_redundant_edges(pg)
    out += _check_grant_ban_conflicts(pg)
    out += _check_now_marker(pg)
    return out


def ensure_valid(g: PortGraph | PolicyGraph) -> PolicyGraph:
    pg = as_policy(g)
    violations = validate(pg)
    if violations:
        raise NotWellFormed(violations)
    return pg


def _check_nodes(pg: PolicyGraph) -> list[Violation]:
    out: list[Violation] = []
    seen: dict[tuple[str, object], int] = {}
    for n in pg.graph.nodes:
        rec = pg.graph.node_record(n)
        typ = rec.get("type")
        if typ not in NODE_TYPES:
            out.append(Violation("bad-shape", f"node {n} has unknown type {typ!r}", (n,)))
            continue
        ports = sorted(pg.graph.port_record(p).name for p in pg.graph.node_ports(n))
        if ports != sorted(NODE_PORTS[typ]):  # type: ignore[index]
            out.append(Violation(
                "bad-shape", f"{typ} node {n} has ports {ports}", (n,)))
        if "ent" not in rec:
            out.append(Violation("bad-entity", f"node {n} has no payload", (n,)))
            continue
        shape_issue = _ent_shape_issue(str(typ), rec["ent"])
        if shape_issue:
            out.append(Violation("bad-entity", f"node {n}: {shape_issue}", (n,)))
            continue
        key = (str(typ), rec["ent"])
        if key in seen:
            out.append(Violation(
                "duplicate-entity",
                f"{typ} entity {render_ent(str(typ), rec['ent'])} appears twice",
                (seen[key], n)))
        else:
            seen[key] = n
    return out


def _ent_shape_issue(typ: str, ent: object) -> str | None:
    if typ in ("P", "C", "A", "R"):
        return None if isinstance(ent, str) else "payload must be a name"
    if typ == "Pr":
        ok = isinstance(ent, tuple) and len(ent) == 2 and all(isinstance(x, str) for x in ent)
        return None if ok else "payload must be an action/resource pair"
    if typ == "O":
        ok = isinstance(ent, tuple) and len(ent) == 4
        return None if ok else "payload must be (action, resource, start, end)"
    if typ == "D":
        ok = isinstance(ent, tuple) and len(ent) == 5
        return None if ok else "payload must be (principal, action, resource, start, end)"
    if typ == "G":
        ok = (isinstance(ent, tuple) and len(ent) == 3
              and isinstance(ent[0], str) and isinstance(ent[1], tuple) and isinstance(ent[2], tuple))
        return None if ok else "payload must be (name, args, pattern)"
    if typ == "E":
        ok = isinstance(ent, tuple) and all(
            isinstance(kv, tuple) and len(kv) == 2 and isinstance(kv[0], str) for kv in ent)
        return None if ok else "payload must be sorted field pairs"
    return None


def _check_edge_structure(pg: PolicyGraph) -> list[Violation]:
    out: list[Violation] = []
    for e in pg.graph.edges:
        rec = pg.graph.edge_record(e)
        if rec.get("aux", False):
            continue
        token = rec.get("type")
        if token not in EDGE_ENDS:
            out.append(Violation("bad-shape", f"edge {e} has unknown type {token!r}", (e,)))
            continue
        t1, t2 = EDGE_ENDS[token]  # type: ignore[index]
        pa, pb = pg.graph.edge_ports(e)
        na, nb = pg.graph.port_node(pa), pg.graph.port_node(pb)
        types = {pg.node_type(na), pg.node_type(nb)}
        if types != {t1, t2}:
            out.append(Violation(
                "bad-endpoint", f"{token} edge {e} joins {sorted(types)} nodes", (e,)))
            continue
        names = (pg.graph.port_record(pa).name, pg.graph.port_record(pb).name)
        if token in DIRECTED:
            ok = set(names) == {"In", "Out"} or (token == "CC" and names == ("Main", "Main"))
            if not ok:
                out.append(Violation(
                    "bad-endpoint", f"{token} edge {e} must run Out to In", (e,)))
        else:
            if names != ("Main", "Main"):
                out.append(Violation(
                    "bad-endpoint", f"{token} edge {e} must join Main ports", (e,)))
        for key, allowed in EDGE_ATTRS.get(str(token), {}).items():
            if rec.get(key) not in allowed:
                out.append(Violation(
                    "bad-endpoint", f"{token} edge {e} has {key}={rec.get(key)!r}", (e,)))
    return out


# per edge type: the attribute that may distinguish two parallel edges
_PARALLEL_BY: dict[str, str] = {"CPr": "auth", "OG": "ge", "DE": "ev"}


def _check_edge_duplicates(pg: PolicyGraph) -> list[Violation]:
    out: list[Violation] = []
    groups: dict[tuple, list[int]] = {}
    for e in pg.graph.edges:
        rec = pg.graph.edge_record(e)
        if rec.get("aux", False) or rec.get("type") not in EDGE_ENDS:
            continue
        token = str(rec["type"])
        pair = frozenset(pg.edge_nodes(e))
        discr = rec.get(_PARALLEL_BY[token]) if token in _PARALLEL_BY else None
        groups.setdefault((token, pair, discr), []).append(e)
    for (token, _pair, _d), es in sorted(groups.items(), key=lambda kv: repr(kv[0])):
        if len(es) > 1:
            out.append(Violation(
                "duplicate-edge",
                f"{len(es)} parallel {token} edges between the same nodes",
                tuple(sorted(es))))
    return out


def _check_payload_consistency(pg: PolicyGraph) -> list[Violation]:
    out: list[Violation] = []

    def ents(e: int) -> tuple[int, object, int, object]:
        n1, n2 = pg.typed_ends(e)
        return n1, pg.ent(n1), n2, pg.ent(n2)

    for e in pg.edges_of_type("PrA"):
        _, pr, _, a = ents(e)
        if isinstance(pr, tuple) and len(pr) == 2 and pr[0] != a:
            out.append(Violation("payload-mismatch", f"PrA edge {e}: pair names action {pr[0]!r}", (e,)))
    for e in pg.edges_of_type("PrR"):
        _, pr, _, r = ents(e)
        if isinstance(pr, tuple) and len(pr) == 2 and pr[1] != r:
            out.append(Violation("payload-mismatch", f"PrR edge {e}: pair names resource {pr[1]!r}", (e,)))
    for e in pg.edges_of_type("OPr"):
        _, o, _, pr = ents(e)
        if isinstance(o, tuple) and len(o) == 4 and o[:2] != pr:
            out.append(Violation("payload-mismatch", f"OPr edge {e}: obligation pair differs", (e,)))
    for e in pg.edges_of_type("OG"):
        _, o, _, g_ = ents(e)
        idx = 2 if pg.graph.edge_record(e)["ge"] == "i" else 3
        if isinstance(o, tuple) and len(o) == 4 and o[idx] != g_:
            out.append(Violation("payload-mismatch", f"OG edge {e}: scheme bound differs", (e,)))
    for e in pg.edges_of_type("DP"):
        _, d, _, p = ents(e)
        if isinstance(d, tuple) and len(d) == 5 and d[0] != p:
            out.append(Violation("payload-mismatch", f"DP edge {e}: duty principal differs", (e,)))
    for e in pg.edges_of_type("DPr"):
        _, d, _, pr = ents(e)
        if isinstance(d, tuple) and len(d) == 5 and (d[1], d[2]) != pr:
            out.append(Violation("payload-mismatch", f"DPr edge {e}: duty pair differs", (e,)))
    for e in pg.edges_of_type("DE"):
        _, d, _, ev_ent = ents(e)
        idx = 3 if pg.graph.edge_record(e)["ev"] == "i" else 4
        if isinstance(d, tuple) and len(d) == 5 and d[idx] != ev_ent:
            out.append(Violation("payload-mismatch", f"DE edge {e}: duty event differs", (e,)))
    for token, field_name in (("EP", "subj"), ("EA", "act"), ("ER", "obj")):
        for e in pg.edges_of_type(token):
            _, ev_ent, _, name = ents(e)
            fields = dict(ev_ent) if isinstance(ev_ent, tuple) else {}
            if fields.get(field_name) != name:
                out.append(Violation(
                    "payload-mismatch", f"{token} edge {e}: event {field_name} differs", (e,)))
    return out


def find_redundant_edges(pg: PolicyGraph) -> list[Violation]:
    """Edges whose removal leaves every derivable relation intact.

    An edge is redundant when a longer path of the same import already
    connects its endpoints; bidirectional subsumption edges need a
    witness for each direction they assert.
    """
    out: list[Violation] = []

    def witness(start: int, pat: tuple[Step, ...], end: int, tested: int) -> bool:
        for nodes, edges in find_paths(pg, start, pat, exclude_edge=tested):
            if nodes[-1] == end and len(edges) >= 2:
                return True
        return False

    for e in pg.edges_of_type("PC"):
        p, c = pg.typed_ends(e)
        if witness(p, (step("PC"), step("CC", FWD, many=True)), c, e):
            out.append(Violation("redundant-edge", f"PC edge {e} is implied by a longer path", (e,)))
    for e in pg.edges_of_type("CC"):
        rec = pg.graph.edge_record(e)
        needed: list[bool] = []
        for flag in ("auth", "obl"):
            if not rec[flag]:
                continue
            for tail, head in pg.orientations(e):
                needed.append(witness(
                    tail, (step("CC", FWD, many=True, **{flag: True}),), head, e))
        if needed and all(needed):
            out.append(Violation("redundant-edge", f"CC edge {e} is implied by longer paths", (e,)))
    for e in pg.edges_of_type("CPr"):
        c, pr = pg.typed_ends(e)
        if pg.graph.edge_record(e)["auth"] == "A":
            pat = (step("CC", FWD, many=True, auth=True), step("CPr", auth="A"))
        else:
            pat = (step("CC", BWD, many=True, auth=True), step("CPr", auth="B"))
        if witness(c, pat, pr, e):
            out.append(Violation("redundant-edge", f"CPr edge {e} is implied by a longer path", (e,)))
    for e in pg.edges_of_type("CO"):
        c, o = pg.typed_ends(e)
        if witness(c, (step("CC", FWD, many=True, obl=True), step("CO")), o, e):
            out.append(Violation("redundant-edge", f"CO edge {e} is implied by a longer path", (e,)))
    for e in pg.edges_of_type("EG"):
        ev, g_ = pg.typed_ends(e)
        if witness(ev, (step("EG"), step("GG", FWD, many=True)), g_, e):
            out.append(Violation("redundant-edge", f"EG edge {e} is implied by a longer path", (e,)))
    for e in pg.edges_of_type("GG"):
        for tail, head in pg.orientations(e):
            if witness(tail, (step("GG", FWD, many=True),), head, e):
                out.append(Violation("redundant-edge", f"GG edge {e} is implied by a longer path", (e,)))
                break
    return out


def _check_grant_ban_conflicts(pg: PolicyGraph) -> list[Violation]:
    out: list[Violation] = []
    for p in pg.nodes_of_type("P"):
        grants = reachable_by(pg, p, GRANT_SHAPE)
        bans = reachable_by(pg, p, BAN_SHAPE)
        for pr in sorted(set(grants) & set(bans)):
            out.append(Violation(
                "grant-ban-conflict",
                f"{pg.render_node(p)} is both granted and banned on {pg.render_node(pr)}",
                (p, pr)))
    return out


def _check_now_marker(pg: PolicyGraph) -> list[Violation]:
    marked = [n for n in pg.nodes_of_type("E") if pg.graph.node_record(n).get("now")]
    if len(marked) > 1:
        return [Violation("multiple-now", "several events claim to be current", tuple(marked))]
    return []


# ----------------------------------------------------------------------
# Extraction
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyModel:
    """The relational content of a policy graph."""

    principals: frozenset[str]
    categories: frozenset[str]
    actions: frozenset[str]
    resources: frozenset[str]
    schemes: frozenset[str]
    events: frozenset[str]
    histories: frozenset[tuple[str, ...]]
    subsume_auth: frozenset[tuple[str, str]]
    subsume_obl: frozenset[tuple[str, str]]
    pca: frozenset[tuple[str, str]]
    arca: frozenset[tuple[str, str, str]]
    barca: frozenset[tuple[str, str, str]]
    par: frozenset[tuple[str, str, str]]
    bar: frozenset[tuple[str, str, str]]
    undet: frozenset[tuple[str, str, str]]
    oca: frozenset[tuple[str, str, str | None, str | None, str]]
    opa: frozenset[tuple[str, str, str, str | None, str | None]]
    et: frozenset[tuple[str, str]]
    ei: frozenset[tuple[str, str, tuple[str, ...]]]
    da: frozenset[tuple[str, str, str, str | None, str | None]]

    def to_json_dict(self) -> dict:
        def deep(v: object) -> object:
            return [deep(x) for x in v] if isinstance(v, tuple) else v

        def li(values: Iterable) -> list:
            return sorted((deep(v) for v in values), key=repr)

        return {
            "principals": li(self.principals),
            "categories": li(self.categories),
            "actions": li(self.actions),
            "resources": li(self.resources),
            "schemes": li(self.schemes),
            "events": li(self.events),
            "histories": li(self.histories),
            "subsume_auth": li(self.subsume_auth),
            "subsume_obl": li(self.subsume_obl),
            "pca": li(self.pca),
            "arca": li(self.arca),
            "barca": li(self.barca),
            "par": li(self.par),
            "bar": li(self.bar),
            "undet": li(self.undet),
            "oca": li(self.oca),
            "opa": li(self.opa),
            "et": li(self.et),
            "ei": li(self.ei),
            "da": li(self.da),
        }

    def counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.to_json_dict().items()}


def _bot_or_render(kind: str, payload: object) -> str | None:
    return None if isinstance(payload, Bottom) else render_ent(kind, payload)


def extract_policy(g: PortGraph | PolicyGraph) -> PolicyModel:
    """Read every relation the graph encodes (auxiliary edges ignored)."""
    pg = as_policy(g)

    def names(typ: str) -> frozenset[str]:
        return frozenset(str(pg.ent(n)) for n in pg.nodes_of_type(typ))

    principals = names("P")
    categories = names("C")
    actions = names("A")
    resources = names("R")
    schemes = frozenset(pg.render_node(n) for n in pg.nodes_of_type("G"))
    events = frozenset(pg.render_node(n) for n in pg.nodes_of_type("E"))

    pca = frozenset(
        (str(pg.ent(p)), str(pg.ent(c)))
        for e in pg.edges_of_type("PC")
        for p, c in [pg.typed_ends(e)]
    )

    def cpr_rel(which: str) -> frozenset[tuple[str, str, str]]:
        out = set()
        for e in pg.edges_of_type("CPr"):
            if pg.graph.edge_record(e)["auth"] != which:
                continue
            c, pr = pg.typed_ends(e)
            a, r = pg.ent(pr)  # type: ignore[misc]
            out.add((str(a), str(r), str(pg.ent(c))))
        return frozenset(out)

    arca = cpr_rel("A")
    barca = cpr_rel("B")

    def subsume(flag: str) -> frozenset[tuple[str, str]]:
        # the asserted order: what the edges say, transitively closed.
        # Authorisation math adds reflexivity on its own (a category
        # always subsumes itself); listing (c, c) pairs here would bury
        # the assertions under padding.
        pairs: set[tuple[str, str]] = set()
        for e in pg.edges_of_type("CC"):
            if not pg.graph.edge_record(e)[flag]:
                continue
            for tail, head in pg.orientations(e):
                pairs.add((str(pg.ent(tail)), str(pg.ent(head))))
        return frozenset(_transitive(pairs))

    subsume_auth = subsume("auth")
    subsume_obl = subsume("obl")

    par: set[tuple[str, str, str]] = set()
    bar: set[tuple[str, str, str]] = set()
    opa: set[tuple[str, str, str, str | None, str | None]] = set()
    for p in pg.nodes_of_type("P"):
        pname = str(pg.ent(p))
        for pr in reachable_by(pg, p, GRANT_SHAPE):
            a, r = pg.ent(pr)  # type: ignore[misc]
            par.add((pname, str(a), str(r)))
        for pr in reachable_by(pg, p, BAN_SHAPE):
            a, r = pg.ent(pr)  # type: ignore[misc]
            bar.add((pname, str(a), str(r)))
        for o in reachable_by(pg, p, OBLIGE_SHAPE):
            a, r, g1, g2 = pg.ent(o)  # type: ignore[misc]
            opa.add((pname, str(a), str(r), _bot_or_render("G", g1), _bot_or_render("G", g2)))

    oca: set[tuple[str, str, str | None, str | None, str]] = set()
    for e in pg.edges_of_type("CO"):
        c, o = pg.typed_ends(e)
        a, r, g1, g2 = pg.ent(o)  # type: ignore[misc]
        oca.add((str(a), str(r), _bot_or_render("G", g1), _bot_or_render("G", g2), str(pg.ent(c))))

    # a typing pair shows the event through the scheme's eyes: only the
    # fields the scheme's pattern constrains
    et: set[tuple[str, str]] = set()
    for ev in pg.nodes_of_type("E"):
        fields = dict(pg.ent(ev))  # type: ignore[arg-type]
        for g_node in reachable_by(pg, ev, TYPING_SHAPE):
            _, _, pattern = pg.ent(g_node)  # type: ignore[misc]
            seen = tuple(sorted((k, fields[k]) for k, _ in pattern if k in fields))
            et.add((render_ent("E", seen), pg.render_node(g_node)))

    histories = frozenset(tuple(pg.render_node(n) for n in chain) for chain in event_chains(pg))
    ei = frozenset(
        (chain[j], chain[k], chain)
        for chain in histories
        for j in range(len(chain))
        for k in range(j + 1, len(chain))
    )

    da: set[tuple[str, str, str, str | None, str | None]] = set()
    for d in pg.nodes_of_type("D"):
        p_, a, r, e1, e2 = pg.ent(d)  # type: ignore[misc]
        da.add((str(p_), str(a), str(r), _bot_or_render("E", e1), _bot_or_render("E", e2)))

    undet = frozenset(
        (p_, a, r)
        for p_ in principals for a in actions for r in resources
        if (p_, a, r) not in par and (p_, a, r) not in bar
    )

    return PolicyModel(
        principals=principals, categories=categories, actions=actions,
        resources=resources, schemes=schemes, events=events,
        histories=histories, subsume_auth=subsume_auth, subsume_obl=subsume_obl,
        pca=pca, arca=arca, barca=barca,
        par=frozenset(par), bar=frozenset(bar), undet=undet,
        oca=frozenset(oca), opa=frozenset(opa),
        et=et, ei=ei, da=frozenset(da),
    )


def event_chains(pg: PolicyGraph) -> list[tuple[int, ...]]:
    """Maximal event successions, earliest first."""
    succ: dict[int, list[int]] = {}
    has_pred: set[int] = set()
    for e in pg.edges_of_type("EE"):
        for tail, head in pg.orientations(e):
            succ.setdefault(tail, []).append(head)
            has_pred.add(head)
    chains: list[tuple[int, ...]] = []

    def extend(path: tuple[int, ...]) -> None:
        nexts = [n for n in sorted(succ.get(path[-1], [])) if n not in path]
        if not nexts:
            chains.append(path)
            return
        for n in nexts:
            extend(path + (n,))

    starts = [n for n in pg.nodes_of_type("E") if n not in has_pred]
    for s in sorted(starts):
        extend((s,))
    return chains


# ----------------------------------------------------------------------
# Decisions
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AuthorizationDecision:
    """The answer to "may principal p do action a on resource r?".

    ``justification`` is the witnessing node path — (id, label) pairs —
    for a grant or a deny, and a short absence note when undetermined.
    """

    verdict: str  # "grant" | "deny" | "undetermined"
    justification: tuple[tuple[int, str], ...] | str

    @property
    def path(self) -> tuple[tuple[int, str], ...] | None:
        """The witnessing node path, if the verdict carries one."""
        return self.justification if isinstance(self.justification, tuple) else None

    def to_json_dict(self) -> dict:
        just: object = self.justification
        if isinstance(just, tuple):
            just = [{"id": n, "label": label} for n, label in just]
        return {"verdict": self.verdict, "justification": just}


def decide(g: PortGraph | PolicyGraph, principal: str, action: str,
           resource: str) -> AuthorizationDecision:
    """Evaluate one access triple against the graph.

    Raises :class:`UnknownEntity` for names the policy does not mention
    and :class:`NotWellFormed` when the triple is simultaneously granted
    and banned.
    """
    pg = as_policy(g)
    p = pg.require_node("P", principal)
    pg.require_node("A", action)
    pg.require_node("R", resource)
    target = pg.find_node("Pr", pr_ent(action, resource))

    grant = ban = None
    if target is not None:
        grant = reachable_by(pg, p, GRANT_SHAPE).get(target)
        ban = reachable_by(pg, p, BAN_SHAPE).get(target)
    if grant and ban:
        raise NotWellFormed([Violation(
            "grant-ban-conflict",
            f"{principal} is both granted and banned on ({action}, {resource})",
            (p, target))])  # type: ignore[arg-type]
    if grant:
        nodes, _edges = grant
        return AuthorizationDecision(
            "grant", tuple((n, pg.render_node(n)) for n in nodes))
    if ban:
        nodes, _edges = ban
        return AuthorizationDecision(
            "deny", tuple((n, pg.render_node(n)) for n in nodes))
    note = ("no category grants or bans the pair"
            if target is not None else "the pair is not part of the policy")
    return AuthorizationDecision("undetermined", note)
