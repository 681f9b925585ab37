"""Attributed port graphs with strategic rewriting.

A port graph is a graph whose nodes expose explicit connection points
(ports); every edge joins two ports.  Nodes, ports and edges all carry
records: flat attribute maps with a distinguished ``Name`` attribute.
Graphs are immutable snapshots built through :class:`GraphBuilder`;
rewriting produces new snapshots and never mutates its input.

Rewrite rules are pairs of port graphs joined by an implicit arrow node
whose ports describe how edges crossing the matched region are handled:

* ``bridge`` ports copy external edges from one left-hand port to one or
  more right-hand ports,
* a ``blackhole`` port erases the external edges of the left-hand ports
  it is connected to,
* ``wire`` ports splice the external neighbours of two left-hand ports
  directly together.

Located graphs carry two element subsets, a *position* (where rewriting
is allowed) and a *banned* set (where it is forbidden); located rules
extend plain rules with subsets controlling how position and banned
evolve across an application.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping


class GraphError(Exception):
    """Base class for port-graph failures."""


class InvalidRule(GraphError):
    """A rewrite rule violates the structural constraints on arrow ports."""


class InvalidMorphism(GraphError):
    """A morphism does not (or no longer does) embed the pattern in the host."""


class MatchError(GraphError):
    """A rule cannot be matched as written (e.g. attribute variables)."""


class BannedViolation(GraphError):
    """A located application overlaps the banned subgraph."""


class PositionViolation(GraphError):
    """A located application does not meet the required position overlap."""


@dataclass(frozen=True)
class Var:
    """A value variable usable in record attributes of rule graphs.

    Variables bind on first occurrence during matching and must agree on
    every later occurrence across all records of the same morphism.
    """

    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


class Bottom:
    """Distinguished "absent" payload (schemes/events that do not exist)."""

    _instance: "Bottom | None" = None

    def __new__(cls) -> "Bottom":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Bottom)

    def __hash__(self) -> int:
        return hash(Bottom)


BOT = Bottom()


def is_value(v: object) -> bool:
    """True if ``v`` is a legal record attribute value."""
    if isinstance(v, (str, bool, int, float, Var, Bottom)):
        return True
    if isinstance(v, tuple):
        return all(is_value(x) for x in v)
    return False


def value_vars(v: object) -> set[str]:
    """Names of all variables occurring (possibly nested) in a value."""
    if isinstance(v, Var):
        return {v.name}
    if isinstance(v, tuple):
        out: set[str] = set()
        for x in v:
            out |= value_vars(x)
        return out
    return set()


def substitute(v: object, bindings: Mapping[str, object]) -> object:
    """Replace every variable in ``v`` by its binding (must be total)."""
    if isinstance(v, Var):
        if v.name not in bindings:
            raise InvalidMorphism(f"unbound variable {v!r} in right-hand side")
        return bindings[v.name]
    if isinstance(v, tuple):
        return tuple(substitute(x, bindings) for x in v)
    return v


class Record:
    """Immutable attribute map with a mandatory ``Name`` attribute."""

    __slots__ = ("_items", "_dict", "_hash")

    def __init__(self, attrs: Mapping[str, object] | None = None, **kw: object):
        merged: dict[object, object] = dict(attrs or {})
        merged.update(kw)
        if "Name" not in merged:
            raise GraphError("record must define a Name attribute")
        for k, v in merged.items():
            if not isinstance(k, (str, Var)):
                raise GraphError(f"record attribute key {k!r} must be a string or variable")
            if not is_value(v):
                raise GraphError(f"record attribute {k!r} has unsupported value {v!r}")
        items = tuple(sorted(merged.items(), key=lambda kv: _key_sort(kv[0])))
        object.__setattr__(self, "_items", items)
        object.__setattr__(self, "_dict", dict(merged))
        object.__setattr__(self, "_hash", hash(items))

    @property
    def name(self) -> object:
        return self._dict["Name"]

    def items(self) -> tuple[tuple[object, object], ...]:
        return self._items

    def keys(self) -> tuple[object, ...]:
        return tuple(k for k, _ in self._items)

    def get(self, key: object, default: object = None) -> object:
        return self._dict.get(key, default)

    def replace(self, **kw: object) -> "Record":
        merged = dict(self._dict)
        merged.update(kw)
        return Record(merged)  # type: ignore[arg-type]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for k, v in self._items:
            if isinstance(k, Var):
                out.add(k.name)
            out |= value_vars(v)
        return out

    def __getitem__(self, key: object) -> object:
        return self._dict[key]

    def __contains__(self, key: object) -> bool:
        return key in self._dict

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Record) and self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._items)
        return f"Record({inner})"


def _key_sort(k: object) -> tuple[int, str]:
    if isinstance(k, Var):
        return (1, k.name)
    return (0, str(k))


@dataclass(frozen=True)
class Signature:
    """Optional vocabulary restriction for a family of graphs.

    ``attributes`` and ``attribute_vars`` (resp. ``values`` and
    ``value_vars``) must be disjoint.  ``None`` leaves a dimension open.
    """

    attributes: frozenset[str] | None = None
    attribute_vars: frozenset[str] | None = None
    values: frozenset[object] | None = None
    value_vars: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.attributes is not None and self.attribute_vars is not None:
            if self.attributes & self.attribute_vars:
                raise GraphError("attribute names and attribute variables overlap")
        if self.value_vars is not None and self.values is not None:
            if {v for v in self.values if isinstance(v, str)} & self.value_vars:
                raise GraphError("value alphabet and value variables overlap")

    def check_record(self, rec: Record) -> None:
        for k, v in rec.items():
            if isinstance(k, Var):
                if self.attribute_vars is not None and k.name not in self.attribute_vars:
                    raise GraphError(f"attribute variable {k!r} outside signature")
            elif self.attributes is not None and k not in self.attributes:
                raise GraphError(f"attribute {k!r} outside signature")
            for name in value_vars(v):
                if self.value_vars is not None and name not in self.value_vars:
                    raise GraphError(f"value variable ?{name} outside signature")


NODE, PORT, EDGE = "node", "port", "edge"


class PortGraph:
    """Immutable attributed port graph.

    All elements (nodes, ports, edges) live in one integer id space; ids
    are assigned at creation time and never reused within a lineage of
    graphs derived from one another.
    """

    def __init__(
        self,
        node_recs: dict[int, Record],
        port_recs: dict[int, Record],
        edge_recs: dict[int, Record],
        port_attach: dict[int, int],
        edge_connect: dict[int, tuple[int, int]],
        next_id: int,
        signature: Signature | None = None,
    ):
        self._node_recs = dict(node_recs)
        self._port_recs = dict(port_recs)
        self._edge_recs = dict(edge_recs)
        self._port_attach = dict(port_attach)
        self._edge_connect = dict(edge_connect)
        self._next_id = next_id
        self.signature = signature
        node_ports: dict[int, list[int]] = {n: [] for n in self._node_recs}
        for p in sorted(self._port_recs):
            node_ports[self._port_attach[p]].append(p)
        self._node_ports = {n: tuple(ps) for n, ps in node_ports.items()}
        port_edges: dict[int, list[int]] = {p: [] for p in self._port_recs}
        pair_index: dict[frozenset[int], list[int]] = {}
        for e in sorted(self._edge_recs):
            a, b = self._edge_connect[e]
            port_edges[a].append(e)
            if b != a:
                port_edges[b].append(e)
            pair_index.setdefault(frozenset((a, b)), []).append(e)
        self._port_edges = {p: tuple(es) for p, es in port_edges.items()}
        self._pair_index = {k: tuple(v) for k, v in pair_index.items()}
        kinds: dict[int, str] = {}
        for n in self._node_recs:
            kinds[n] = NODE
        for p in self._port_recs:
            kinds[p] = PORT
        for e in self._edge_recs:
            kinds[e] = EDGE
        self._kinds = kinds

    # -- inspection ----------------------------------------------------

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self._node_recs))

    @cached_property
    def ports(self) -> tuple[int, ...]:
        return tuple(sorted(self._port_recs))

    @cached_property
    def edges(self) -> tuple[int, ...]:
        return tuple(sorted(self._edge_recs))

    def elements(self) -> tuple[int, ...]:
        return tuple(sorted(self._kinds))

    def kind(self, i: int) -> str:
        return self._kinds[i]

    def has(self, i: int) -> bool:
        return i in self._kinds

    @property
    def next_id(self) -> int:
        return self._next_id

    def node_record(self, n: int) -> Record:
        return self._node_recs[n]

    def port_record(self, p: int) -> Record:
        return self._port_recs[p]

    def edge_record(self, e: int) -> Record:
        return self._edge_recs[e]

    def record(self, i: int) -> Record:
        k = self._kinds[i]
        if k == NODE:
            return self._node_recs[i]
        if k == PORT:
            return self._port_recs[i]
        return self._edge_recs[i]

    def node_ports(self, n: int) -> tuple[int, ...]:
        return self._node_ports[n]

    def port_node(self, p: int) -> int:
        return self._port_attach[p]

    def port_edges(self, p: int) -> tuple[int, ...]:
        return self._port_edges[p]

    def edge_ports(self, e: int) -> tuple[int, int]:
        return self._edge_connect[e]

    def edges_between(self, a: int, b: int) -> tuple[int, ...]:
        return self._pair_index.get(frozenset((a, b)), ())

    def arity(self, p: int) -> int:
        return len(self._port_edges[p])

    def node_of_element(self, i: int) -> tuple[int, ...]:
        """Nodes an element touches (itself / its attach / its endpoints)."""
        k = self._kinds[i]
        if k == NODE:
            return (i,)
        if k == PORT:
            return (self._port_attach[i],)
        a, b = self._edge_connect[i]
        na, nb = self._port_attach[a], self._port_attach[b]
        return (na,) if na == nb else tuple(sorted((na, nb)))

    def full_record(self, i: int) -> Record:
        """Record view including the synthesized structural attributes."""
        k = self._kinds[i]
        if k == NODE:
            return self._node_recs[i].replace(Interface=tuple(self._node_ports[i]))
        if k == PORT:
            return self._port_recs[i].replace(
                Attach=self._port_attach[i], Arity=len(self._port_edges[i])
            )
        return self._edge_recs[i].replace(Connect=self._edge_connect[i])

    def builder(self) -> "GraphBuilder":
        return GraphBuilder.from_graph(self)

    def __repr__(self) -> str:
        return (
            f"PortGraph(nodes={len(self._node_recs)}, ports={len(self._port_recs)}, "
            f"edges={len(self._edge_recs)})"
        )

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "nodes": [{"id": n, "record": encode_record(self._node_recs[n])} for n in self.nodes],
            "ports": [
                {"id": p, "node": self._port_attach[p], "record": encode_record(self._port_recs[p])}
                for p in self.ports
            ],
            "edges": [
                {"id": e, "ports": list(self._edge_connect[e]), "record": encode_record(self._edge_recs[e])}
                for e in self.edges
            ],
            "next_id": self._next_id,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, sort_keys=True)

    @staticmethod
    def from_json_dict(doc: dict) -> "PortGraph":
        b = GraphBuilder()
        for nd in doc["nodes"]:
            b.add_node(decode_record(nd["record"]), ident=nd["id"])
        for pd in doc["ports"]:
            b.add_port(pd["node"], decode_record(pd["record"]), ident=pd["id"])
        for ed in doc["edges"]:
            a, c = ed["ports"]
            b.add_edge(a, c, decode_record(ed["record"]), ident=ed["id"])
        b.bump_next_id(doc.get("next_id", 0))
        return b.finish()

    @staticmethod
    def from_json(text: str) -> "PortGraph":
        return PortGraph.from_json_dict(json.loads(text))

    def to_dot(self) -> str:
        """Generic graphviz export for debugging views."""
        lines = ["graph portgraph {", "  node [shape=record];"]
        for n in self.nodes:
            rec = self._node_recs[n]
            attrs = "\\n".join(f"{k}={_short(v)}" for k, v in rec.items() if k != "Name")
            label = f"{rec.name}#{n}" + (f"\\n{attrs}" if attrs else "")
            lines.append(f'  n{n} [label="{label}"];')
        for e in self.edges:
            a, b = self._edge_connect[e]
            na, nb = self._port_attach[a], self._port_attach[b]
            rec = self._edge_recs[e]
            lines.append(f'  n{na} -- n{nb} [label="{rec.name}#{e}"];')
        lines.append("}")
        return "\n".join(lines)


def _short(v: object) -> str:
    s = repr(v).replace('"', "'")
    return s if len(s) <= 24 else s[:21] + "..."


def encode_value(v: object) -> object:
    """JSON-able encoding of a record value (tagged for non-scalars)."""
    if isinstance(v, Bottom):
        return {"bot": True}
    if isinstance(v, Var):
        return {"var": v.name}
    if isinstance(v, tuple):
        return {"t": [encode_value(x) for x in v]}
    return v


def decode_value(v: object) -> object:
    if isinstance(v, dict):
        if v.get("bot"):
            return BOT
        if "var" in v:
            return Var(v["var"])
        if "t" in v:
            return tuple(decode_value(x) for x in v["t"])
        raise GraphError(f"unknown tagged value {v!r}")
    if isinstance(v, list):
        return tuple(decode_value(x) for x in v)
    return v


def encode_record(rec: Record) -> dict:
    out: dict[str, object] = {}
    for k, v in rec.items():
        key = k.name if isinstance(k, Var) else k
        if isinstance(k, Var):
            key = f"?{k.name}"
        out[str(key)] = encode_value(v)
    return out


def decode_record(doc: Mapping[str, object]) -> Record:
    attrs: dict[object, object] = {}
    for k, v in doc.items():
        key: object = Var(k[1:]) if k.startswith("?") else k
        attrs[key] = decode_value(v)
    return Record(attrs)  # type: ignore[arg-type]


class GraphBuilder:
    """Mutable construction buffer producing immutable :class:`PortGraph`s."""

    def __init__(self, signature: Signature | None = None):
        self._node_recs: dict[int, Record] = {}
        self._port_recs: dict[int, Record] = {}
        self._edge_recs: dict[int, Record] = {}
        self._port_attach: dict[int, int] = {}
        self._edge_connect: dict[int, tuple[int, int]] = {}
        self._next = 0
        self.signature = signature

    @staticmethod
    def from_graph(g: PortGraph) -> "GraphBuilder":
        b = GraphBuilder(g.signature)
        b._node_recs = dict(g._node_recs)
        b._port_recs = dict(g._port_recs)
        b._edge_recs = dict(g._edge_recs)
        b._port_attach = dict(g._port_attach)
        b._edge_connect = dict(g._edge_connect)
        b._next = g.next_id
        return b

    def _alloc(self, ident: int | None) -> int:
        if ident is None:
            ident = self._next
        if ident in self._node_recs or ident in self._port_recs or ident in self._edge_recs:
            raise GraphError(f"element id {ident} already in use")
        self._next = max(self._next, ident + 1)
        return ident

    def bump_next_id(self, n: int) -> None:
        self._next = max(self._next, n)

    def add_node(self, record: Record, ident: int | None = None) -> int:
        i = self._alloc(ident)
        self._node_recs[i] = record
        return i

    def add_port(self, node: int, record: Record, ident: int | None = None) -> int:
        if node not in self._node_recs:
            raise GraphError(f"no node {node} to attach port to")
        i = self._alloc(ident)
        self._port_recs[i] = record
        self._port_attach[i] = node
        return i

    def add_edge(self, a: int, b: int, record: Record, ident: int | None = None) -> int:
        for p in (a, b):
            if p not in self._port_recs:
                raise GraphError(f"no port {p} to connect edge to")
        i = self._alloc(ident)
        self._edge_recs[i] = record
        self._edge_connect[i] = (a, b)
        return i

    def set_record(self, ident: int, record: Record) -> None:
        for pool in (self._node_recs, self._port_recs, self._edge_recs):
            if ident in pool:
                pool[ident] = record
                return
        raise GraphError(f"no element {ident}")

    def get_record(self, ident: int) -> Record:
        for pool in (self._node_recs, self._port_recs, self._edge_recs):
            if ident in pool:
                return pool[ident]
        raise GraphError(f"no element {ident}")

    def has(self, ident: int) -> bool:
        return any(ident in pool for pool in (self._node_recs, self._port_recs, self._edge_recs))

    def remove_edge(self, e: int) -> None:
        if e not in self._edge_recs:
            raise GraphError(f"no edge {e}")
        del self._edge_recs[e]
        del self._edge_connect[e]

    def remove_port(self, p: int) -> None:
        if p not in self._port_recs:
            raise GraphError(f"no port {p}")
        if any(p in pair for pair in self._edge_connect.values()):
            raise GraphError(f"port {p} still has edges")
        del self._port_recs[p]
        del self._port_attach[p]

    def remove_node(self, n: int) -> None:
        if n not in self._node_recs:
            raise GraphError(f"no node {n}")
        if any(att == n for att in self._port_attach.values()):
            raise GraphError(f"node {n} still has ports")
        del self._node_recs[n]

    def remove_node_cascade(self, n: int) -> None:
        """Remove a node together with its ports and their edges."""
        ports = {p for p, att in self._port_attach.items() if att == n}
        for e, (a, b) in list(self._edge_connect.items()):
            if a in ports or b in ports:
                self.remove_edge(e)
        for p in sorted(ports):
            self.remove_port(p)
        self.remove_node(n)

    def node_ports(self, n: int) -> tuple[int, ...]:
        return tuple(sorted(p for p, att in self._port_attach.items() if att == n))

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self._node_recs))

    def finish(self) -> PortGraph:
        # structural integrity
        for p, att in self._port_attach.items():
            if att not in self._node_recs:
                raise GraphError(f"port {p} attached to missing node {att}")
        for e, (a, b) in self._edge_connect.items():
            if a not in self._port_recs or b not in self._port_recs:
                raise GraphError(f"edge {e} connects missing ports {(a, b)}")
        # records with the same Name must define the same attribute set
        name_keys: dict[object, tuple[object, ...]] = {}
        for pool in (self._node_recs, self._port_recs, self._edge_recs):
            for i, rec in pool.items():
                ks = rec.keys()
                prev = name_keys.setdefault(rec.name, ks)
                if prev != ks:
                    raise GraphError(
                        f"records named {rec.name!r} disagree on attributes: {prev} vs {ks}"
                    )
                if self.signature is not None:
                    self.signature.check_record(rec)
        return PortGraph(
            self._node_recs, self._port_recs, self._edge_recs,
            self._port_attach, self._edge_connect, self._next, self.signature,
        )


# ----------------------------------------------------------------------
# Rewrite rules
# ----------------------------------------------------------------------

BRIDGE, BLACKHOLE, WIRE = "bridge", "blackhole", "wire"


@dataclass(frozen=True)
class ArrowPort:
    """One port of the arrow node joining the two sides of a rule."""

    type: str
    lhs_ports: tuple[int, ...]
    rhs_ports: tuple[int, ...] = ()


@dataclass(frozen=True)
class RewriteRule:
    """A port-graph rewrite rule ``lhs => rhs`` with arrow-node wiring."""

    lhs: PortGraph
    rhs: PortGraph
    arrow: tuple[ArrowPort, ...] = ()
    name: str = "rule"

    def __post_init__(self) -> None:
        lhs_ports = set(self.lhs.ports)
        rhs_ports = set(self.rhs.ports)
        blackholes = 0
        seen_type: dict[int, str] = {}
        for ap in self.arrow:
            if ap.type not in (BRIDGE, BLACKHOLE, WIRE):
                raise InvalidRule(f"unknown arrow port type {ap.type!r}")
            for lp in ap.lhs_ports:
                if lp not in lhs_ports:
                    raise InvalidRule(f"arrow port references missing lhs port {lp}")
                prev = seen_type.setdefault(lp, ap.type)
                if prev != ap.type:
                    raise InvalidRule(
                        f"lhs port {lp} is connected to arrow ports of different types"
                    )
            for rp in ap.rhs_ports:
                if rp not in rhs_ports:
                    raise InvalidRule(f"arrow port references missing rhs port {rp}")
            if ap.type == BRIDGE:
                if len(ap.lhs_ports) != 1 or not ap.rhs_ports:
                    raise InvalidRule("a bridge port needs exactly one lhs port and at least one rhs port")
            elif ap.type == BLACKHOLE:
                blackholes += 1
                if ap.rhs_ports:
                    raise InvalidRule("a blackhole port may only be connected to lhs ports")
                if not ap.lhs_ports:
                    raise InvalidRule("a blackhole port needs at least one lhs port")
            else:  # WIRE
                if len(ap.lhs_ports) != 2 or ap.rhs_ports:
                    raise InvalidRule("a wire port needs exactly two lhs ports and no rhs ports")
                if ap.lhs_ports[0] == ap.lhs_ports[1]:
                    raise InvalidRule("a wire port must connect two distinct lhs ports")
        if blackholes > 1:
            raise InvalidRule("at most one blackhole port is allowed")
        lhs_vars = _graph_vars(self.lhs)
        rhs_vars = _graph_vars(self.rhs)
        extra = rhs_vars - lhs_vars
        if extra:
            raise InvalidRule(f"rhs introduces unbound variables: {sorted(extra)}")

    @cached_property
    def arrow_connected(self) -> frozenset[int]:
        """Lhs ports connected to the arrow node (external edges allowed)."""
        out: set[int] = set()
        for ap in self.arrow:
            out |= set(ap.lhs_ports)
        return frozenset(out)


def _graph_vars(g: PortGraph) -> set[str]:
    out: set[str] = set()
    for i in g.elements():
        out |= g.record(i).variables()
    return out


@dataclass(frozen=True)
class Morphism:
    """An injective embedding of a rule's left-hand side into a host graph."""

    node_map: tuple[tuple[int, int], ...]
    port_map: tuple[tuple[int, int], ...]
    edge_map: tuple[tuple[int, int], ...]
    bindings: tuple[tuple[str, object], ...] = ()

    @cached_property
    def nodes(self) -> dict[int, int]:
        return dict(self.node_map)

    @cached_property
    def ports(self) -> dict[int, int]:
        return dict(self.port_map)

    @cached_property
    def edges(self) -> dict[int, int]:
        return dict(self.edge_map)

    @cached_property
    def binding(self) -> dict[str, object]:
        return dict(self.bindings)

    @cached_property
    def images(self) -> frozenset[int]:
        vals = [h for _, h in self.node_map]
        vals += [h for _, h in self.port_map]
        vals += [h for _, h in self.edge_map]
        return frozenset(vals)

    def sort_key(self) -> tuple:
        return (
            tuple(sorted(h for _, h in self.node_map)),
            self.node_map, self.port_map, self.edge_map,
        )

    def digest(self) -> str:
        """Short stable identifier for derivation records."""
        payload = repr((self.node_map, self.port_map, self.edge_map, self.bindings))
        return hashlib.sha1(payload.encode()).hexdigest()[:12]


def _compat(
    pattern: Record, host: Record, bindings: dict[str, object]
) -> dict[str, object] | None:
    """Match a pattern record against a host record, extending bindings."""
    new = bindings
    for k, v in pattern.items():
        if isinstance(k, Var):
            raise MatchError(f"attribute variable {k!r} is not supported in matching")
        if k not in host:
            return None
        hv = host[k]
        if isinstance(v, Var):
            if v.name in new:
                if new[v.name] != hv:
                    return None
            else:
                if new is bindings:
                    new = dict(bindings)
                new[v.name] = hv
        elif v != hv:
            return None
    return new if new is not bindings else dict(bindings)


def match_rule(host: PortGraph, rule: RewriteRule) -> list[Morphism]:
    """All admissible embeddings of ``rule.lhs`` in ``host``, canonically ordered.

    An embedding is injective on nodes, ports and edges, preserves
    attachment and connection, is label-compatible (ground attributes
    equal, variables bound consistently), and satisfies the dangling
    condition: the image of an lhs port that is not connected to the
    arrow node carries no edges outside the image, and unmapped ports of
    matched host nodes carry no edges at all.
    """
    lhs = rule.lhs
    lnodes = list(lhs.nodes)
    results: list[Morphism] = []

    def try_nodes(i: int, nmap: dict[int, int], used: set[int], bindings: dict[str, object]) -> None:
        if i == len(lnodes):
            try_ports(nmap, bindings)
            return
        ln = lnodes[i]
        lrec = lhs.node_record(ln)
        for hn in host.nodes:
            if hn in used:
                continue
            nb = _compat(lrec, host.node_record(hn), bindings)
            if nb is None:
                continue
            if len(lhs.node_ports(ln)) > len(host.node_ports(hn)):
                continue
            nmap[ln] = hn
            used.add(hn)
            try_nodes(i + 1, nmap, used, nb)
            used.discard(hn)
            del nmap[ln]

    def try_ports(nmap: dict[int, int], bindings: dict[str, object]) -> None:
        lports = list(lhs.ports)

        def rec_port(j: int, pmap: dict[int, int], used: set[int], bnd: dict[str, object]) -> None:
            if j == len(lports):
                try_edges(nmap, pmap, bnd)
                return
            lp = lports[j]
            lrec = lhs.port_record(lp)
            hnode = nmap[lhs.port_node(lp)]
            for hp in host.node_ports(hnode):
                if hp in used:
                    continue
                nb = _compat(lrec, host.port_record(hp), bnd)
                if nb is None:
                    continue
                pmap[lp] = hp
                used.add(hp)
                rec_port(j + 1, pmap, used, nb)
                used.discard(hp)
                del pmap[lp]

        rec_port(0, {}, set(), bindings)

    def try_edges(nmap: dict[int, int], pmap: dict[int, int], bindings: dict[str, object]) -> None:
        ledges = list(lhs.edges)

        def rec_edge(j: int, emap: dict[int, int], used: set[int], bnd: dict[str, object]) -> None:
            if j == len(ledges):
                finish(nmap, pmap, emap, bnd)
                return
            le = ledges[j]
            la, lb = lhs.edge_ports(le)
            lrec = lhs.edge_record(le)
            for he in host.edges_between(pmap[la], pmap[lb]):
                if he in used:
                    continue
                nb = _compat(lrec, host.edge_record(he), bnd)
                if nb is None:
                    continue
                emap[le] = he
                used.add(he)
                rec_edge(j + 1, emap, used, nb)
                used.discard(he)
                del emap[le]

        rec_edge(0, {}, set(), bindings)

    def finish(nmap: dict[int, int], pmap: dict[int, int], emap: dict[int, int], bnd: dict[str, object]) -> None:
        edge_image = set(emap.values())
        # dangling condition on mapped ports
        for lp, hp in pmap.items():
            if lp in rule.arrow_connected:
                continue
            for he in host.port_edges(hp):
                if he not in edge_image:
                    return
        # unmapped ports of matched nodes must be edge-free
        mapped_ports = set(pmap.values())
        for hn in nmap.values():
            for hp in host.node_ports(hn):
                if hp not in mapped_ports and host.port_edges(hp):
                    return
        results.append(
            Morphism(
                node_map=tuple(sorted(nmap.items())),
                port_map=tuple(sorted(pmap.items())),
                edge_map=tuple(sorted(emap.items())),
                bindings=tuple(sorted(bnd.items())),
            )
        )

    try_nodes(0, {}, set(), {})
    results.sort(key=Morphism.sort_key)
    return results


def check_morphism(host: PortGraph, rule: RewriteRule, f: Morphism) -> None:
    """Raise :class:`InvalidMorphism` unless ``f`` still embeds the lhs in host."""
    lhs = rule.lhs
    nmap, pmap, emap = f.nodes, f.ports, f.edges
    if set(nmap) != set(lhs.nodes) or set(pmap) != set(lhs.ports) or set(emap) != set(lhs.edges):
        raise InvalidMorphism("morphism does not cover the left-hand side")
    for pool, getter in ((nmap, host.has), (pmap, host.has), (emap, host.has)):
        for h in pool.values():
            if not getter(h):
                raise InvalidMorphism(f"morphism references missing host element {h}")
    if len(set(nmap.values())) != len(nmap) or len(set(pmap.values())) != len(pmap) \
            or len(set(emap.values())) != len(emap):
        raise InvalidMorphism("morphism is not injective")
    bindings = f.binding
    for ln, hn in nmap.items():
        if host.kind(hn) != NODE or _compat(lhs.node_record(ln), host.node_record(hn), bindings) is None:
            raise InvalidMorphism(f"node {ln} no longer matches host {hn}")
    for lp, hp in pmap.items():
        if host.kind(hp) != PORT or _compat(lhs.port_record(lp), host.port_record(hp), bindings) is None:
            raise InvalidMorphism(f"port {lp} no longer matches host {hp}")
        if nmap[lhs.port_node(lp)] != host.port_node(hp):
            raise InvalidMorphism(f"port {lp} attachment not preserved")
    for le, he in emap.items():
        if host.kind(he) != EDGE or _compat(lhs.edge_record(le), host.edge_record(he), bindings) is None:
            raise InvalidMorphism(f"edge {le} no longer matches host {he}")
        la, lb = lhs.edge_ports(le)
        if frozenset((pmap[la], pmap[lb])) != frozenset(host.edge_ports(he)):
            raise InvalidMorphism(f"edge {le} connection not preserved")
    edge_image = set(emap.values())
    for lp, hp in pmap.items():
        if lp in rule.arrow_connected:
            continue
        for he in host.port_edges(hp):
            if he not in edge_image:
                raise InvalidMorphism(f"port {lp} image has external edges")
    mapped_ports = set(pmap.values())
    for hn in nmap.values():
        for hp in host.node_ports(hn):
            if hp not in mapped_ports and host.port_edges(hp):
                raise InvalidMorphism(f"unmapped port {hp} of matched node has edges")


@dataclass(frozen=True)
class RhsInstance:
    """Fresh host ids allocated for the right-hand side during one application."""

    node_map: tuple[tuple[int, int], ...]
    port_map: tuple[tuple[int, int], ...]
    edge_map: tuple[tuple[int, int], ...]

    @cached_property
    def mapping(self) -> dict[int, int]:
        out = dict(self.node_map)
        out.update(self.port_map)
        out.update(self.edge_map)
        return out


def _apply(host: PortGraph, rule: RewriteRule, f: Morphism) -> tuple[PortGraph, RhsInstance]:
    check_morphism(host, rule, f)
    lhs, rhs = rule.lhs, rule.rhs
    bindings = f.binding
    b = GraphBuilder.from_graph(host)

    # --- build phase: fresh instance of the rhs
    inst_nodes: dict[int, int] = {}
    inst_ports: dict[int, int] = {}
    inst_edges: dict[int, int] = {}
    for rn in rhs.nodes:
        rec = _subst_record(rhs.node_record(rn), bindings)
        inst_nodes[rn] = b.add_node(rec)
    for rp in rhs.ports:
        rec = _subst_record(rhs.port_record(rp), bindings)
        inst_ports[rp] = b.add_port(inst_nodes[rhs.port_node(rp)], rec)
    for re_ in rhs.edges:
        ra, rb = rhs.edge_ports(re_)
        rec = _subst_record(rhs.edge_record(re_), bindings)
        inst_edges[re_] = b.add_edge(inst_ports[ra], inst_ports[rb], rec)

    # --- classify matched ports by their arrow connection
    pmap = f.ports
    port_repl: dict[int, list[int] | None] = {}  # host port -> replacements (None = erase)
    wire_pairs: list[tuple[int, int]] = []  # (host port, host port) per wire
    for ap in rule.arrow:
        if ap.type == BRIDGE:
            hp = pmap[ap.lhs_ports[0]]
            targets = [inst_ports[rp] for rp in ap.rhs_ports]
            prev = port_repl.get(hp) or []  # several bridges may share an lhs port
            port_repl[hp] = sorted(set(prev) | set(targets))
        elif ap.type == BLACKHOLE:
            for lp in ap.lhs_ports:
                port_repl[pmap[lp]] = None
        else:
            wire_pairs.append((pmap[ap.lhs_ports[0]], pmap[ap.lhs_ports[1]]))

    matched_edges = set(f.edges.values())
    matched_ports = set(pmap.values())
    matched_nodes = set(f.nodes.values())

    def external_edges(hp: int) -> list[int]:
        return [e for e in host.port_edges(hp) if e not in matched_edges]

    consumed: set[int] = set()

    # --- wire splicing
    for hp1, hp2 in wire_pairs:
        xs = external_edges(hp1)
        ys = external_edges(hp2)
        consumed.update(xs)
        consumed.update(ys)
        for x in xs:
            ox = _other_end(host, x, hp1)
            for y in ys:
                oy = _other_end(host, y, hp2)
                for a in _wire_targets(ox, matched_ports, port_repl):
                    for c in _wire_targets(oy, matched_ports, port_repl):
                        b.add_edge(a, c, host.edge_record(x))

    # --- bridge / blackhole rewiring
    for he in sorted(set(itertools.chain.from_iterable(
            external_edges(hp) for hp in matched_ports))):
        if he in consumed:
            continue
        qa, qb = host.edge_ports(he)
        ra = _endpoint_replacement(qa, matched_ports, port_repl)
        rb = _endpoint_replacement(qb, matched_ports, port_repl)
        if ra is None or rb is None:
            b.remove_edge(he)
            continue
        pairs = [(x, y) for x in ra for y in rb]
        rec = host.edge_record(he)
        b.remove_edge(he)
        if len(pairs) == 1:
            x, y = pairs[0]
            b.add_edge(x, y, rec, ident=he)  # single target keeps its id
        else:
            for x, y in pairs:
                b.add_edge(x, y, rec)

    for he in sorted(consumed):
        b.remove_edge(he)

    # --- deletion phase
    for he in sorted(matched_edges):
        b.remove_edge(he)
    for hn in sorted(matched_nodes):
        b.remove_node_cascade(hn)

    g2 = b.finish()
    inst = RhsInstance(
        node_map=tuple(sorted(inst_nodes.items())),
        port_map=tuple(sorted(inst_ports.items())),
        edge_map=tuple(sorted(inst_edges.items())),
    )
    return g2, inst


def _subst_record(rec: Record, bindings: Mapping[str, object]) -> Record:
    attrs: dict[object, object] = {}
    for k, v in rec.items():
        if isinstance(k, Var):
            raise InvalidMorphism(f"attribute variable {k!r} cannot be instantiated")
        attrs[k] = substitute(v, bindings)
    return Record(attrs)  # type: ignore[arg-type]


def _other_end(host: PortGraph, e: int, hp: int) -> int:
    a, b = host.edge_ports(e)
    return b if a == hp else a


def _wire_targets(
    endpoint: int, matched_ports: set[int], port_repl: dict[int, list[int] | None]
) -> list[int]:
    if endpoint not in matched_ports:
        return [endpoint]
    repl = port_repl.get(endpoint)
    if repl is None:
        return []  # erased or wired itself: the spliced edge is dropped
    return repl


def _endpoint_replacement(
    endpoint: int, matched_ports: set[int], port_repl: dict[int, list[int] | None]
) -> list[int] | None:
    """None = erase the edge; otherwise the list of replacement ports."""
    if endpoint not in matched_ports:
        return [endpoint]
    if endpoint not in port_repl:
        # matched, not arrow-connected: dangling condition guaranteed no
        # external edges here, so this endpoint never reaches us.
        return None
    return port_repl[endpoint]


def apply_rule(host: PortGraph, rule: RewriteRule, f: Morphism) -> PortGraph:
    """Apply ``rule`` at the match ``f`` and return the rewritten graph."""
    g2, _ = _apply(host, rule, f)
    return g2


# ----------------------------------------------------------------------
# Located graphs and rules
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LocatedGraph:
    """A graph with a position subgraph and a banned subgraph."""

    graph: PortGraph
    position: frozenset[int] = frozenset()
    banned: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        elems = set(self.graph.elements())
        if not set(self.position) <= elems:
            raise GraphError("position contains elements outside the graph")
        if not set(self.banned) <= elems:
            raise GraphError("banned contains elements outside the graph")

    @staticmethod
    def whole(g: PortGraph) -> "LocatedGraph":
        return LocatedGraph(g, position=frozenset(g.elements()), banned=frozenset())


@dataclass(frozen=True)
class LocatedRule:
    """A rewrite rule with position/banned bookkeeping.

    ``where_lhs`` (optional) is the lhs element subset whose image must
    equal the overlap of the match with the current position;
    ``pos_rhs`` is the rhs subset whose instance becomes part of the new
    position; ``ban_rhs`` joins the banned set.
    """

    rule: RewriteRule
    where_lhs: frozenset[int] | None = None
    pos_rhs: frozenset[int] = frozenset()
    ban_rhs: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        lhs_elems = set(self.rule.lhs.elements())
        rhs_elems = set(self.rule.rhs.elements())
        if self.where_lhs is not None and not set(self.where_lhs) <= lhs_elems:
            raise InvalidRule("where_lhs references elements outside the lhs")
        if not set(self.pos_rhs) <= rhs_elems:
            raise InvalidRule("pos_rhs references elements outside the rhs")
        if not set(self.ban_rhs) <= rhs_elems:
            raise InvalidRule("ban_rhs references elements outside the rhs")

    @staticmethod
    def plain(rule: RewriteRule) -> "LocatedRule":
        """Wrap a rule with neutral bookkeeping (new material stays in position)."""
        return LocatedRule(rule, None, frozenset(rule.rhs.elements()), frozenset())


def admissible(lhost: LocatedGraph, lrule: LocatedRule, f: Morphism) -> bool:
    """Whether a match satisfies the located application conditions."""
    images = f.images
    if images & lhost.banned:
        return False
    if lrule.where_lhs is not None:
        want = frozenset(_image_of(f, i, lrule.rule.lhs) for i in lrule.where_lhs)
        if images & lhost.position != want:
            return False
    return True


def _image_of(f: Morphism, i: int, lhs: PortGraph) -> int:
    k = lhs.kind(i)
    if k == NODE:
        return f.nodes[i]
    if k == PORT:
        return f.ports[i]
    return f.edges[i]


def apply_located_rule(lhost: LocatedGraph, lrule: LocatedRule, f: Morphism) -> LocatedGraph:
    """Apply a located rule, updating position and banned sets.

    Raises :class:`BannedViolation` / :class:`PositionViolation` when the
    located preconditions fail.
    """
    images = f.images
    if images & lhost.banned:
        raise BannedViolation("match overlaps the banned subgraph")
    if lrule.where_lhs is not None:
        want = frozenset(_image_of(f, i, lrule.rule.lhs) for i in lrule.where_lhs)
        if images & lhost.position != want:
            raise PositionViolation("match/position overlap differs from the required subset")
    g2, inst = _apply(lhost.graph, lrule.rule, f)
    live = set(g2.elements())
    new_pos = (set(lhost.position) - set(images)) | {inst.mapping[i] for i in lrule.pos_rhs}
    new_ban = set(lhost.banned) | {inst.mapping[i] for i in lrule.ban_rhs}
    return LocatedGraph(g2, frozenset(new_pos & live), frozenset(new_ban & live))


# ----------------------------------------------------------------------
# Canonical forms (test support)
# ----------------------------------------------------------------------


def canonical_form(g: PortGraph, max_nodes: int = 9) -> tuple:
    """Order-independent certificate for small graphs.

    Two isomorphic graphs (same records, same wiring, different ids)
    produce equal certificates.  Intended for tests on graphs with up to
    ``max_nodes`` nodes; cost grows factorially in the size of groups of
    indistinguishable nodes.
    """
    nodes = list(g.nodes)
    if len(nodes) > max_nodes:
        raise GraphError(f"canonical_form supports at most {max_nodes} nodes")

    def node_class(n: int) -> tuple:
        ports = tuple(sorted(
            (g.port_record(p).items(), g.arity(p)) for p in g.node_ports(n)
        ))
        return (g.node_record(n).items(), ports)

    classes: dict[tuple, list[int]] = {}
    for n in nodes:
        classes.setdefault(node_class(n), []).append(n)
    ordered_classes = [classes[k] for k in sorted(classes, key=repr)]

    best: tuple | None = None
    for perm in _class_orders(ordered_classes):
        index = {n: i for i, n in enumerate(perm)}
        cert = _certificate(g, perm, index)
        if best is None or cert < best:
            best = cert
    assert best is not None or not nodes
    return best if best is not None else ((), ())


def _class_orders(classes: list[list[int]]) -> Iterator[list[int]]:
    perms = [list(itertools.permutations(c)) for c in classes]
    for combo in itertools.product(*perms):
        out: list[int] = []
        for group in combo:
            out.extend(group)
        yield out


def _certificate(g: PortGraph, perm: list[int], index: dict[int, int]) -> tuple:
    node_part = []
    for n in perm:
        port_certs = []
        for p in g.node_ports(n):
            edge_certs = []
            for e in g.port_edges(p):
                a, b = g.edge_ports(e)
                other = b if a == p else a
                edge_certs.append((
                    g.edge_record(e).items(),
                    index[g.port_node(other)],
                    g.port_record(other).items(),
                    1 if a == b else 0,
                ))
            port_certs.append((g.port_record(p).items(), tuple(sorted(edge_certs, key=repr))))
        node_part.append((g.node_record(n).items(), tuple(sorted(port_certs, key=repr))))
    edge_part = []
    for e in g.edges:
        a, b = g.edge_ports(e)
        ea = (index[g.port_node(a)], g.port_record(a).items())
        eb = (index[g.port_node(b)], g.port_record(b).items())
        lo, hi = sorted((ea, eb), key=repr)
        edge_part.append((lo, hi, g.edge_record(e).items()))
    return (tuple(node_part), tuple(sorted(edge_part, key=repr)))
