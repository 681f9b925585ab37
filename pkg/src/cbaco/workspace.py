"""Loading, saving and presenting policies.

The interchange format is a flat JSON document with these keys (all
optional, no others allowed)::

    principals, categories, actions, resources   -- lists of names
    schemes     -- [{"name", "args", "pattern"}]; "?x" pattern values bind
    events      -- [{"act": ..., "subj": ..., ...}] field maps
    histories   -- lists of event indices, each chained in order
    now         -- event index marked as current, or null
    pca         -- [[principal, category]]
    arca, barca -- [[action, resource, category]]
    oca         -- [{"action", "resource", "start", "end", "category"}]
                   with start/end scheme indices or null
    cc_auth, cc_obl -- [[sub-category, super-category]]
    gg          -- [[specific scheme index, general scheme index]]

Pair nodes, their action/resource spokes, obligation-to-pair links,
event-to-entity links and event typing are synthesized while loading, so
files stay close to the relational surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .obligations import SimulationState
from .policy import (
    DIRECTED,
    EDGE_ENDS,
    NODE_PORTS,
    PolicyBuilder,
    PolicyError,
    PolicyGraph,
    UnknownEntity,
    as_policy,
    ensure_valid,
    event_chains,
    render_ent,
)
from .portgraph import Bottom, PortGraph, Var

DOC_KEYS = (
    "principals", "categories", "actions", "resources",
    "schemes", "events", "histories", "now",
    "pca", "arca", "barca", "oca",
    "cc_auth", "cc_obl", "gg",
)


class ParseError(PolicyError):
    """The document is not a policy description."""


class EntityTypeError(ParseError):
    """A reference names a missing entity or one of the wrong kind."""


def event_fields(raw: object) -> dict[str, object]:
    """Check that a payload can identify an event: a flat map of scalars."""
    if not isinstance(raw, Mapping):
        raise ParseError("an event is a field map")
    for k, v in raw.items():
        if not isinstance(k, str):
            raise ParseError(f"event field names must be strings, not {k!r}")
        if v is not None and not isinstance(v, (str, int, float, bool)):
            raise ParseError(
                f"event field {k!r} must be a scalar, not a {type(v).__name__}")
    return dict(raw)


def _decode_pattern(raw: Mapping[str, object]) -> dict[str, object]:
    out: dict[str, object] = {}
    for k, v in raw.items():
        if isinstance(v, str) and v.startswith("?"):
            out[k] = Var(v[1:])
        else:
            out[k] = v
    return out


def policy_from_doc(doc: Mapping[str, object]) -> PortGraph:
    """Build the graph a policy document describes."""
    if not isinstance(doc, Mapping):
        raise ParseError("policy document must be an object")
    unknown = set(doc) - set(DOC_KEYS)
    if unknown:
        raise ParseError(f"unknown keys: {sorted(unknown)}")

    def section(key: str, default: object) -> object:
        value = doc.get(key, default)
        if default is not None and not isinstance(value, type(default)):
            raise ParseError(f"{key} must be a {type(default).__name__}")
        return value

    b = PolicyBuilder()
    try:
        for name in section("principals", []):  # type: ignore[union-attr]
            b.principal(str(name))
        for name in section("categories", []):  # type: ignore[union-attr]
            b.category(str(name))
        for name in section("actions", []):  # type: ignore[union-attr]
            b.action(str(name))
        for name in section("resources", []):  # type: ignore[union-attr]
            b.resource(str(name))

        scheme_nodes: list[int] = []
        for i, raw in enumerate(section("schemes", [])):  # type: ignore[union-attr]
            try:
                scheme_nodes.append(b.scheme(
                    str(raw["name"]),
                    [str(a) for a in raw.get("args", [])],
                    _decode_pattern(raw["pattern"]),
                ))
            except (KeyError, TypeError, AttributeError) as exc:
                raise ParseError(f"scheme {i} is malformed: {exc}") from exc

        now_index = doc.get("now")
        event_nodes: list[int] = []
        for i, fields in enumerate(section("events", [])):  # type: ignore[union-attr]
            try:
                payload = event_fields(fields)
            except ParseError as exc:
                raise ParseError(f"event {i}: {exc}") from exc
            event_nodes.append(b.event(payload, now=(now_index == i)))
        if now_index is not None and not (
                isinstance(now_index, int) and 0 <= now_index < len(event_nodes)):
            raise EntityTypeError(f"now index {now_index!r} names no event")

        for pair in section("pca", []):  # type: ignore[union-attr]
            b.pc(str(pair[0]), str(pair[1]))

        auth_pairs = {(str(x), str(y)) for x, y in section("cc_auth", [])}  # type: ignore[union-attr]
        obl_pairs = {(str(x), str(y)) for x, y in section("cc_obl", [])}  # type: ignore[union-attr]
        done: set[tuple[str, str]] = set()
        for sub, sup in sorted(auth_pairs | obl_pairs):
            if (sub, sup) in done:
                continue
            flags = ((sub, sup) in auth_pairs, (sub, sup) in obl_pairs)
            reverse = ((sup, sub) in auth_pairs, (sup, sub) in obl_pairs)
            if reverse != (False, False):
                # the two categories subsume each other: one two-way edge
                if reverse != flags:
                    raise ParseError(
                        f"categories {sub!r} and {sup!r} subsume each other "
                        "with different auth/obl flags per direction")
                done.add((sup, sub))
                b.cc(sub, sup, auth=flags[0], obl=flags[1], bidirectional=True)
            else:
                b.cc(sub, sup, auth=flags[0], obl=flags[1])

        for a, r, c in section("arca", []):  # type: ignore[union-attr]
            b.grant(str(c), str(a), str(r))
        for a, r, c in section("barca", []):  # type: ignore[union-attr]
            b.forbid(str(c), str(a), str(r))

        for i, raw in enumerate(section("oca", [])):  # type: ignore[union-attr]
            if not isinstance(raw, Mapping):
                raise ParseError(f"oca entry {i} must be an object")
            bounds = []
            for key in ("start", "end"):
                idx = raw.get(key)
                if idx is None:
                    bounds.append(None)
                elif isinstance(idx, int) and 0 <= idx < len(scheme_nodes):
                    bounds.append(scheme_nodes[idx])
                else:
                    raise EntityTypeError(f"oca entry {i}: {key} index {idx!r} names no scheme")
            o = b.obligation(str(raw["action"]), str(raw["resource"]), bounds[0], bounds[1])
            b.require(str(raw["category"]), o)

        for spec, gen in section("gg", []):  # type: ignore[union-attr]
            try:
                b.gg(scheme_nodes[spec], scheme_nodes[gen])
            except (IndexError, TypeError) as exc:
                raise EntityTypeError(f"gg pair [{spec!r}, {gen!r}] names no scheme") from exc

        for i, chain in enumerate(section("histories", [])):  # type: ignore[union-attr]
            try:
                nodes = [event_nodes[j] for j in chain]
            except (IndexError, TypeError) as exc:
                raise EntityTypeError(f"history {i} names no event: {exc}") from exc
            for earlier, later in zip(nodes, nodes[1:]):
                b.ee(earlier, later)

        for e in event_nodes:
            b.link_event(e)
        b.synthesize_eg()
    except UnknownEntity as exc:
        raise EntityTypeError(str(exc)) from exc
    except PolicyError:
        raise
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed policy document: {exc}") from exc
    return b.finish()


# ----------------------------------------------------------------------
# Files
# ----------------------------------------------------------------------


def load_policy(data: bytes | str) -> PortGraph:
    """Parse a policy document (JSON text) into its graph."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    return policy_from_doc(doc)


def doc_from_policy(g: PortGraph) -> dict:
    """The relational document a graph denotes.

    Auxiliary edges and duty nodes are never written: the former are a
    cached closure, the latter only ever arise from replaying events.
    Sections that would be empty are omitted.
    """
    pg = as_policy(g)

    def ents(typ: str) -> list[str]:
        return sorted(str(pg.ent(n)) for n in pg.nodes_of_type(typ))

    scheme_nodes = sorted(pg.nodes_of_type("G"), key=pg.render_node)
    scheme_index = {pg.ent(n): i for i, n in enumerate(scheme_nodes)}
    event_nodes = sorted(pg.nodes_of_type("E"), key=pg.render_node)
    event_index = {n: i for i, n in enumerate(event_nodes)}

    schemes = []
    for n in scheme_nodes:
        name, args, pattern = pg.ent(n)  # type: ignore[misc]
        schemes.append({
            "name": name,
            "args": list(args),
            "pattern": {
                k: (f"?{v.name}" if isinstance(v, Var) else v)
                for k, v in pattern
            },
        })

    events = [dict(pg.ent(n)) for n in event_nodes]  # type: ignore[call-overload]

    histories = sorted(
        [event_index[n] for n in chain] for chain in event_chains(pg)
    )

    pca = sorted(
        [str(pg.ent(p)), str(pg.ent(c))]
        for e in pg.edges_of_type("PC")
        for p, c in [pg.typed_ends(e)]
    )

    cc_auth: list[list[str]] = []
    cc_obl: list[list[str]] = []
    for e in pg.edges_of_type("CC"):
        rec = pg.graph.edge_record(e)
        for tail, head in pg.orientations(e):
            pair = [str(pg.ent(tail)), str(pg.ent(head))]
            if rec["auth"]:
                cc_auth.append(pair)
            if rec["obl"]:
                cc_obl.append(pair)

    arca: list[list[str]] = []
    barca: list[list[str]] = []
    for e in pg.edges_of_type("CPr"):
        c, pr = pg.typed_ends(e)
        a, r = pg.ent(pr)  # type: ignore[misc]
        triple = [str(a), str(r), str(pg.ent(c))]
        (arca if pg.graph.edge_record(e)["auth"] == "A" else barca).append(triple)

    oca = []
    for e in pg.edges_of_type("CO"):
        c, o = pg.typed_ends(e)
        a, r, g1, g2 = pg.ent(o)  # type: ignore[misc]
        oca.append({
            "action": str(a),
            "resource": str(r),
            "start": None if isinstance(g1, Bottom) else scheme_index[g1],
            "end": None if isinstance(g2, Bottom) else scheme_index[g2],
            "category": str(pg.ent(c)),
        })
    oca.sort(key=repr)

    gg = sorted(
        [scheme_index[pg.ent(tail)], scheme_index[pg.ent(head)]]
        for e in pg.edges_of_type("GG")
        for tail, head in pg.orientations(e)
    )

    doc: dict = {
        "principals": ents("P"),
        "categories": ents("C"),
        "actions": ents("A"),
        "resources": ents("R"),
        "schemes": schemes,
        "events": events,
        "histories": histories,
        "pca": pca,
        "arca": sorted(arca),
        "barca": sorted(barca),
        "oca": oca,
        "cc_auth": sorted(cc_auth),
        "cc_obl": sorted(cc_obl),
        "gg": gg,
    }
    now = pg.now_event()
    if now is not None:
        doc["now"] = event_index[now]
    return {k: v for k, v in doc.items() if v not in ([], None)}


def save_policy(g: PortGraph) -> bytes:
    """Serialize a graph as a policy document; inverse of :func:`load_policy`."""
    doc = doc_from_policy(g)
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# ----------------------------------------------------------------------
# Visual attributes
# ----------------------------------------------------------------------

SHAPES = {
    "P": "Pentagon", "C": "Triangle", "Pr": "Hexagon", "O": "Hexagon",
    "D": "Hexagon", "A": "Square", "R": "Diamond", "E": "Circle", "G": "Ring",
}

YELLOW, BLUE, GREEN, LIGHT_BLUE = "yellow", "blue", "green", "light-blue"
GRAY, EDGE_GREEN, EDGE_RED = "gray", "green", "red"


def _edge_color(pg: PolicyGraph, e: int) -> str:
    token = pg.edge_type(e)
    rec = pg.graph.edge_record(e)
    if token == "CPr":
        return EDGE_GREEN if rec["auth"] == "A" else EDGE_RED
    if token == "OG":
        return EDGE_GREEN if rec["ge"] == "i" else EDGE_RED
    if token == "DE":
        return EDGE_GREEN if rec["ev"] == "i" else EDGE_RED
    return GRAY


def _pair_spokes(pg: PolicyGraph, pr: int) -> set[int]:
    out = {pr}
    for e in pg.node_edges(pr):
        if pg.edge_type(e) in ("PrA", "PrR"):
            a, b = pg.edge_nodes(e)
            out.add(b if a == pr else a)
    return out


def _cc_closure(pg: PolicyGraph, seeds: set[int], flag: str) -> set[int]:
    adj: dict[int, set[int]] = {}
    for e in pg.edges_of_type("CC"):
        if pg.graph.edge_record(e)[flag]:
            a, b = pg.edge_nodes(e)
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
    out = set(seeds)
    frontier = list(seeds)
    while frontier:
        n = frontier.pop()
        for m in adj.get(n, ()):
            if m not in out:
                out.add(m)
                frontier.append(m)
    return out


def _membership(pg: PolicyGraph) -> tuple[set[int], set[int]]:
    """Nodes taking part in grant/ban structure vs obligation structure.

    Grant/ban side: the categories carrying (or subsuming/subsumed by
    carriers of) permission assignments, those assignments' pairs with
    their action/resource spokes, and principals assigned to any such
    category.  Obligation side: the same flow for obligation
    assignments, plus schemes reachable over generalization, events the
    schemes type (with their subject/action/object spokes), and duty
    nodes with everything they reference.  A node can sit on both sides.
    """
    perm: set[int] = set()
    perm_cats: set[int] = set()
    for e in pg.edges_of_type("CPr"):
        c, pr = pg.typed_ends(e)
        perm_cats.add(c)
        perm |= _pair_spokes(pg, pr)
    perm |= _cc_closure(pg, perm_cats, "auth")

    obl: set[int] = set()
    obl_cats: set[int] = set()
    obl_schemes: set[int] = set()
    for e in pg.edges_of_type("CO"):
        c, o = pg.typed_ends(e)
        obl_cats.add(c)
        obl.add(o)
    for e in pg.edges_of_type("OG"):
        o, g_node = pg.typed_ends(e)
        obl.add(o)
        obl_schemes.add(g_node)
    for o in list(obl):
        if pg.node_type(o) != "O":
            continue
        for e in pg.node_edges(o, "OPr"):
            a, b = pg.edge_nodes(e)
            obl |= _pair_spokes(pg, b if a == o else a)
    for d in pg.nodes_of_type("D"):
        obl.add(d)
        for e in pg.node_edges(d):
            token = pg.edge_type(e)
            if token not in ("DP", "DPr", "DE"):
                continue
            a, b = pg.edge_nodes(e)
            other = b if a == d else a
            obl.add(other)
            if token == "DPr":
                obl |= _pair_spokes(pg, other)

    # spread over scheme generalization, then to the events the schemes type
    gg_adj: dict[int, set[int]] = {}
    for e in pg.edges_of_type("GG"):
        a, b = pg.edge_nodes(e)
        gg_adj.setdefault(a, set()).add(b)
        gg_adj.setdefault(b, set()).add(a)
    frontier = list(obl_schemes)
    while frontier:
        n = frontier.pop()
        for m in gg_adj.get(n, ()):
            if m not in obl_schemes:
                obl_schemes.add(m)
                frontier.append(m)
    obl |= obl_schemes

    obl_events = {
        ev for e in pg.edges_of_type("EG")
        for ev, g_node in [pg.typed_ends(e)]
        if g_node in obl_schemes
    }
    obl_events |= {n for n in obl if pg.node_type(n) == "E"}
    for ev in obl_events:
        obl.add(ev)
        for e in pg.node_edges(ev):
            if pg.edge_type(e) in ("EP", "EA", "ER"):
                a, b = pg.edge_nodes(e)
                obl.add(b if a == ev else a)

    obl |= _cc_closure(pg, obl_cats, "obl")

    for e in pg.edges_of_type("PC"):
        p, c = pg.typed_ends(e)
        if c in perm:
            perm.add(p)
        if c in obl:
            obl.add(p)
    return perm, obl


def compute_visuals(g: PortGraph) -> dict[int, dict]:
    """Shape, port count and color for every node and edge.

    Node colors follow the side of the policy a node serves: yellow for
    grant/ban structure only (and for nodes serving neither), blue for
    obligation structure only, green for both, and light-blue for the
    current event regardless of membership.  Edge colors depend only on
    the edge type and its own attributes.  Raises NotWellFormed when the
    graph does not validate.
    """
    pg = as_policy(g)
    ensure_valid(pg)
    perm, obl = _membership(pg)
    now = pg.now_event()
    vis: dict[int, dict] = {}
    for n in pg.graph.nodes:
        typ = pg.node_type(n)
        if n == now:
            color = LIGHT_BLUE
        elif n in perm and n in obl:
            color = GREEN
        elif n in obl:
            color = BLUE
        else:
            color = YELLOW
        vis[n] = {
            "kind": "node",
            "shape": SHAPES[typ],
            "ports": len(NODE_PORTS[typ]),
            "color": color,
        }
    for e in pg.graph.edges:
        vis[e] = {"kind": "edge", "color": _edge_color(pg, e)}
    return vis


# ----------------------------------------------------------------------
# Views and exports
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class HideRule:
    """Hide every node or edge whose record carries attr == value."""

    kind: str  # "node" | "edge"
    attr: str
    value: object

    @staticmethod
    def parse(text: str) -> "HideRule":
        """Read the ``kind:attr=value`` form, e.g. ``node:type=E``."""
        try:
            kind, rest = text.split(":", 1)
            attr, raw = rest.split("=", 1)
        except ValueError:
            raise ParseError(f"hide rule {text!r} is not kind:attr=value") from None
        if kind not in ("node", "edge"):
            raise ParseError(f"hide rule kind must be node or edge, not {kind!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        return HideRule(kind, attr, value)


@dataclass(frozen=True)
class ViewFilter:
    """What a rendering of the graph leaves out.

    Auxiliary edges are always left out; hide rules remove further
    elements, and edges lose their endpoints' company: an edge whose
    node is hidden is hidden with it.
    """

    hide: tuple[HideRule, ...] = ()

    def hidden_elements(self, g: PortGraph, include_aux: bool = False) -> frozenset[int]:
        pg = as_policy(g)
        out: set[int] = set()

        def struck(rec, kind: str) -> bool:
            return any(
                h.kind == kind and h.attr in rec and rec[h.attr] == h.value
                for h in self.hide
            )

        for n in g.nodes:
            if struck(g.node_record(n), "node"):
                out.add(n)
        for e in g.edges:
            rec = g.edge_record(e)
            auto_hidden = not include_aux and rec.get("aux") is True
            if auto_hidden or struck(rec, "edge"):
                out.add(e)
                continue
            if any(pg.edge_nodes(e)[i] in out for i in (0, 1)):
                out.add(e)
        return frozenset(out)


def _edge_ends(pg: PolicyGraph, e: int) -> tuple[dict, dict, str]:
    """Both ends of an edge as {node, port}, tail first, plus arrow style."""
    a, b = pg.graph.edge_ports(e)
    name_a = pg.graph.port_record(a).name
    name_b = pg.graph.port_record(b).name
    token = pg.edge_type(e)
    arrows = "none"
    if token in DIRECTED:
        if name_a == "In" and name_b == "Out":
            a, b, name_a, name_b = b, a, name_b, name_a
        arrows = "both" if name_a == name_b else "forward"
    else:
        t1, t2 = EDGE_ENDS[token]
        if t1 != t2 and pg.node_type(pg.graph.port_node(a)) != t1:
            a, b, name_a, name_b = b, a, name_b, name_a
    ends = (
        {"node": pg.graph.port_node(a), "port": str(name_a)},
        {"node": pg.graph.port_node(b), "port": str(name_b)},
    )
    return ends[0], ends[1], arrows


def export_view(g: PortGraph, view: ViewFilter | None = None,
                include_aux: bool = False) -> dict:
    """The graph with visual attributes, minus whatever the view hides.

    Auxiliary edges stay hidden unless ``include_aux`` asks for them
    (an explorer inspecting strategy output wants to see what a run
    added; such edges carry ``"aux": true``).
    """
    pg = as_policy(g)
    vis = compute_visuals(g)
    hidden = (view or ViewFilter()).hidden_elements(g, include_aux=include_aux)
    nodes = []
    for n in sorted(pg.graph.nodes):
        if n in hidden:
            continue
        rec = pg.graph.node_record(n)
        item = {
            "id": n,
            "type": pg.node_type(n),
            "label": pg.render_node(n),
            "shape": vis[n]["shape"],
            "ports": vis[n]["ports"],
            "color": vis[n]["color"],
        }
        if pg.node_type(n) == "E":
            item["now"] = bool(rec["now"])
        nodes.append(item)
    edges = []
    for e in sorted(pg.graph.edges):
        if e in hidden:
            continue
        rec = pg.graph.edge_record(e)
        tail, head, arrows = _edge_ends(pg, e)
        item = {
            "id": e,
            "type": pg.edge_type(e),
            "from": tail,
            "to": head,
            "arrows": arrows,
            "color": vis[e]["color"],
        }
        for extra in ("auth", "obl", "ge", "ev"):
            if extra in rec:
                item[extra] = rec[extra]
        if rec.get("aux") is True:
            item["aux"] = True
        edges.append(item)
    return {"nodes": nodes, "edges": edges}


_DOT_SHAPES = {
    "Pentagon": "pentagon", "Triangle": "triangle", "Hexagon": "hexagon",
    "Square": "square", "Diamond": "diamond", "Circle": "circle",
    "Ring": "doublecircle",
}
_DOT_NODE_COLORS = {
    YELLOW: "khaki", BLUE: "steelblue1", GREEN: "palegreen",
    LIGHT_BLUE: "lightblue",
}
_DOT_EDGE_COLORS = {GRAY: "gray50", EDGE_GREEN: "green3", EDGE_RED: "red2"}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: PortGraph, view: ViewFilter | None = None) -> str:
    """Graphviz text for the graph, honoring the view filter."""
    doc = export_view(g, view)
    lines = ["digraph policy {", "  node [style=filled];"]
    for n in doc["nodes"]:
        attrs = (
            f"shape={_DOT_SHAPES[n['shape']]}, "
            f"fillcolor={_DOT_NODE_COLORS[n['color']]}, "
            f"label={_dot_quote(n['label'])}"
        )
        lines.append(f"  n{n['id']} [{attrs}];")
    for e in doc["edges"]:
        dirs = {"forward": "forward", "both": "both", "none": "none"}[e["arrows"]]
        attrs = (
            f"label={_dot_quote(e['type'])}, "
            f"color={_DOT_EDGE_COLORS[e['color']]}, dir={dirs}"
        )
        lines.append(f"  n{e['from']['node']} -> n{e['to']['node']} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Duty reports
# ----------------------------------------------------------------------


def query_duties(
    state: SimulationState,
    principal: str | None = None,
    status: str | None = None,
) -> tuple[dict, ...]:
    """Duties with their current state, origin and trigger, filtered.

    ``principal`` restricts to one owing principal; ``status`` to one of
    the duty states.  Each entry names the obligation it came from and
    the event that opened it (absent for duties live from the start).
    """
    rows = []
    for s in state.duty_states():
        r = s.record
        if principal is not None and r.principal != principal:
            continue
        if status is not None and s.status != status:
            continue
        rows.append({
            "principal": r.principal,
            "action": r.action,
            "resource": r.resource,
            "start": None if isinstance(r.start, Bottom) else render_ent("E", r.start),
            "end": None if r.end is None else render_ent("E", r.end),
            "status": s.status,
            "fulfilling": None if s.fulfilling is None else render_ent("E", s.fulfilling),
            "origin": render_ent("O", r.origin),
        })
    rows.sort(key=lambda row: (row["principal"], row["origin"], repr(row["start"])))
    return tuple(rows)
