"""Document round-trips, visual attributes, views and duty reports."""

from __future__ import annotations

import json
import random

import pytest

from cbaco.obligations import SimulationState
from cbaco.policy import NotWellFormed, as_policy, extract_policy, validate
from cbaco.portgraph import GraphBuilder, Record
from cbaco.rules import saturate
from cbaco.workspace import (
    HideRule,
    ParseError,
    ViewFilter,
    compute_visuals,
    doc_from_policy,
    export_dot,
    export_view,
    load_policy,
    policy_from_doc,
    query_duties,
    save_policy,
)

from generators import random_policy_doc


def example1():
    with open("fixtures/example1.cbaco", "rb") as fh:
        return load_policy(fh.read())


def example1_events():
    with open("fixtures/example1_events.jsonl") as fh:
        return [json.loads(line) for line in fh]


def colors_by_label(g):
    pg = as_policy(g)
    vis = compute_visuals(g)
    return {pg.render_node(n): vis[n]["color"] for n in pg.graph.nodes}


# ----------------------------------------------------------------------
# node colors
# ----------------------------------------------------------------------


def test_example1_node_colors():
    colors = colors_by_label(example1())
    # serves both permission and obligation structure
    assert colors["J. Dorian"] == "green"
    assert colors["C. Tuck"] == "green"
    assert colors["Dr(J. Lewis)"] == "green"
    assert colors["Dr(F. Mason)"] == "green"
    assert colors["Read"] == "green"
    assert colors["Rec(J. Lewis)"] == "green"
    # obligation structure only
    assert colors["Declare"] == "blue"
    assert colors["Admin-log"] == "blue"
    assert colors["(Declare, Admin-log)"] == "blue"
    assert colors["gen_read[C. Tuck, J. Lewis]"] == "blue"
    assert colors["gen_read[J. Dorian, F. Mason]"] == "blue"
    # permission structure only
    assert colors["Rec(F. Mason)"] == "yellow"
    assert colors["(Read, Rec(J. Lewis))"] == "yellow"
    # the Declare event types no scheme and is owed by nothing yet
    assert colors["{act: Declare, obj: Admin-log, subj: C. Tuck, time: 200}"] == "yellow"


def test_current_event_is_light_blue_regardless_of_membership():
    colors = colors_by_label(example1())
    assert colors["{act: Read, obj: Rec(J. Lewis), subj: C. Tuck, time: 120}"] == "light-blue"


def test_isolated_entities_default_to_yellow():
    g = policy_from_doc({"principals": ["ana"], "resources": ["vault"]})
    assert set(colors_by_label(g).values()) == {"yellow"}


def test_materialized_duties_are_blue():
    st, _ = SimulationState.fresh(example1()).replay(example1_events())
    pg = as_policy(st.graph)
    vis = compute_visuals(st.graph)
    duty_colors = [vis[n]["color"] for n in pg.nodes_of_type("D")]
    assert duty_colors and set(duty_colors) == {"blue"}


def test_category_color_spreads_over_subsumption():
    g = policy_from_doc({
        "principals": ["ana"],
        "categories": ["low", "mid", "high"],
        "actions": ["read"],
        "resources": ["doc"],
        "pca": [["ana", "low"]],
        "arca": [["read", "doc", "high"]],
        "cc_auth": [["low", "mid"], ["mid", "high"]],
    })
    colors = colors_by_label(g)
    assert colors["low"] == colors["mid"] == colors["high"] == "yellow"
    assert colors["ana"] == "yellow"


def test_visuals_refuse_broken_graphs():
    b = GraphBuilder()
    n = b.add_node(Record(Name="X", type="X", ent="x"))
    b.add_port(n, Record(Name="Main"))
    with pytest.raises(NotWellFormed):
        compute_visuals(b.finish())


def test_shapes_and_port_counts():
    g = example1()
    pg = as_policy(g)
    vis = compute_visuals(g)
    by_type = {}
    for n in pg.graph.nodes:
        by_type[pg.node_type(n)] = (vis[n]["shape"], vis[n]["ports"])
    assert by_type["P"] == ("Pentagon", 1)
    assert by_type["C"] == ("Triangle", 3)
    assert by_type["Pr"] == ("Hexagon", 1)
    assert by_type["O"] == ("Hexagon", 1)
    assert by_type["A"] == ("Square", 1)
    assert by_type["R"] == ("Diamond", 1)
    assert by_type["E"] == ("Circle", 3)
    assert by_type["G"] == ("Ring", 3)


# ----------------------------------------------------------------------
# edge colors
# ----------------------------------------------------------------------


def test_edge_colors_follow_type_and_attributes():
    g = policy_from_doc({
        "principals": ["ana"],
        "categories": ["clerks"],
        "actions": ["read", "file"],
        "resources": ["doc", "cabinet"],
        "schemes": [
            {"name": "opened", "args": [], "pattern": {"act": "read"}},
            {"name": "closed", "args": [], "pattern": {"act": "file"}},
        ],
        "pca": [["ana", "clerks"]],
        "arca": [["read", "doc", "clerks"]],
        "barca": [["read", "cabinet", "clerks"]],
        "oca": [{"action": "file", "resource": "cabinet",
                 "start": 0, "end": 1, "category": "clerks"}],
    })
    pg = as_policy(g)
    vis = compute_visuals(g)
    seen = {}
    for e in pg.graph.edges:
        rec = pg.graph.edge_record(e)
        key = (pg.edge_type(e), rec.get("auth"), rec.get("ge"))
        seen[key] = vis[e]["color"]
    assert seen[("CPr", "A", None)] == "green"
    assert seen[("CPr", "B", None)] == "red"
    assert seen[("OG", None, "i")] == "green"
    assert seen[("OG", None, "f")] == "red"
    assert seen[("PC", None, None)] == "gray"
    assert seen[("CO", None, None)] == "gray"


def test_duty_event_links_take_their_flag_color():
    st, _ = SimulationState.fresh(example1()).replay(example1_events())
    pg = as_policy(st.graph)
    vis = compute_visuals(st.graph)
    flags = {
        pg.graph.edge_record(e)["ev"]: vis[e]["color"]
        for e in pg.edges_of_type("DE")
    }
    assert flags["i"] == "green"


# ----------------------------------------------------------------------
# views
# ----------------------------------------------------------------------


def test_hide_rule_parsing():
    assert HideRule.parse("node:type=E") == HideRule("node", "type", "E")
    assert HideRule.parse("edge:aux=true") == HideRule("edge", "aux", True)
    assert HideRule.parse('node:ent="x"') == HideRule("node", "ent", "x")
    with pytest.raises(ParseError):
        HideRule.parse("nonsense")
    with pytest.raises(ParseError):
        HideRule.parse("port:type=E")


def test_auxiliary_edges_never_render():
    g = policy_from_doc({
        "principals": ["ana"],
        "categories": ["low", "mid", "high"],
        "pca": [["ana", "low"]],
        "cc_auth": [["low", "mid"], ["mid", "high"]],
    })
    saturated = saturate(g).state.graph
    pg = as_policy(saturated)
    assert len(pg.edges_of_type("PC", include_aux=True)) > len(pg.edges_of_type("PC"))
    rendered = {e["id"] for e in export_view(saturated)["edges"]}
    assert rendered  # plain edges still show
    for e in pg.graph.edges:
        if pg.is_aux(e):
            assert e not in rendered


def test_hiding_events_drops_their_edges_but_not_the_extraction():
    g = example1()
    before = extract_policy(g)
    view = ViewFilter((HideRule.parse("node:type=E"),))
    doc = export_view(g, view)
    assert all(n["type"] != "E" for n in doc["nodes"])
    assert all(e["type"] not in ("EE", "EP", "EA", "ER", "EG") for e in doc["edges"])
    assert extract_policy(g) == before
    assert before.et  # the events were really there
    full = export_view(g)
    assert len(full["nodes"]) == len(doc["nodes"]) + 2


def test_edge_hide_rules_strike_by_attribute():
    g = example1()
    doc = export_view(g, ViewFilter((HideRule.parse("edge:type=PC"),)))
    assert all(e["type"] != "PC" for e in doc["edges"])
    assert any(n["type"] == "P" for n in doc["nodes"])  # nodes stay


# ----------------------------------------------------------------------
# exports
# ----------------------------------------------------------------------


def test_export_view_shape():
    doc = export_view(example1())
    assert sorted(doc) == ["edges", "nodes"]
    ids = [n["id"] for n in doc["nodes"]]
    assert ids == sorted(ids)
    for n in doc["nodes"]:
        assert {"id", "type", "label", "shape", "ports", "color"} <= set(n)
        assert (n["type"] == "E") == ("now" in n)
    for e in doc["edges"]:
        assert {"id", "type", "from", "to", "arrows", "color"} <= set(e)
        assert set(e["from"]) == {"node", "port"}
    json.dumps(doc)  # everything must serialize


def test_export_view_arrow_conventions():
    g = policy_from_doc({
        "categories": ["a", "b", "c"],
        "cc_auth": [["a", "b"], ["b", "c"], ["c", "b"]],
        "cc_obl": [["b", "c"], ["c", "b"]],
    })
    doc = export_view(g)
    pg = as_policy(g)
    label = {n["id"]: n["label"] for n in doc["nodes"]}
    by_arrow = {}
    for e in doc["edges"]:
        by_arrow.setdefault(e["arrows"], []).append(
            (label[e["from"]["node"]], label[e["to"]["node"]]))
    assert by_arrow["forward"] == [("a", "b")]
    assert by_arrow["both"] in ([("b", "c")], [("c", "b")])


def test_export_view_typed_edge_order():
    doc = export_view(example1())
    types = {n["id"]: n["type"] for n in doc["nodes"]}
    for e in doc["edges"]:
        if e["type"] == "PC":
            assert types[e["from"]["node"]] == "P"
            assert types[e["to"]["node"]] == "C"
        if e["type"] == "CPr":
            assert types[e["from"]["node"]] == "C"


def test_export_dot_is_wellformed_graphviz():
    g = example1()
    dot = export_dot(g)
    assert dot.startswith("digraph policy {")
    assert dot.rstrip().endswith("}")
    assert dot.count("[shape=") == 18
    assert "doublecircle" in dot and "pentagon" in dot
    assert 'label="J. Dorian"' in dot
    filtered = export_dot(g, ViewFilter((HideRule.parse("node:type=E"),)))
    assert "circle" not in filtered.replace("doublecircle", "")


def test_export_dot_escapes_labels():
    g = policy_from_doc({"resources": ['say "hi"\\now']})
    dot = export_dot(g)
    assert '"say \\"hi\\"\\\\now"' in dot


# ----------------------------------------------------------------------
# documents round-trip
# ----------------------------------------------------------------------


def test_empty_document_loads_to_an_empty_valid_graph():
    g = policy_from_doc({})
    assert validate(g) == []
    assert as_policy(g).graph.nodes == ()
    assert doc_from_policy(g) == {}


def test_example1_survives_the_round_trip():
    g = example1()
    again = load_policy(save_policy(g))
    assert extract_policy(again) == extract_policy(g)
    assert save_policy(again) == save_policy(g)


def test_duty_nodes_and_aux_edges_never_serialize():
    st, _ = SimulationState.fresh(example1()).replay(example1_events())
    saturated = saturate(st.graph).state.graph
    assert doc_from_policy(saturated) == doc_from_policy(st.graph)
    again = as_policy(load_policy(save_policy(saturated)))
    assert again.nodes_of_type("D") == ()
    assert again.edges_of_type("PC", include_aux=True) == again.edges_of_type("PC")


def test_generated_policies_round_trip():
    rng = random.Random(4242)
    checked = 0
    for _ in range(50):
        doc = random_policy_doc(rng)
        g = policy_from_doc(doc)
        assert validate(g) == []
        data = save_policy(g)
        again = load_policy(data)
        assert extract_policy(again) == extract_policy(g)
        assert save_policy(again) == data
        checked += 1
    assert checked == 50


def test_load_rejects_broken_json_and_unknown_keys():
    with pytest.raises(ParseError):
        load_policy(b"{ not json")
    with pytest.raises(ParseError):
        load_policy(b'{"sprinkles": []}')
    with pytest.raises(ParseError):
        load_policy(b'[1, 2]')


# ----------------------------------------------------------------------
# duty reports
# ----------------------------------------------------------------------


def test_query_duties_reports_the_full_story():
    st, _ = SimulationState.fresh(example1()).replay(example1_events())
    rows = query_duties(st)
    assert len(rows) == 1
    row = rows[0]
    assert row["principal"] == "C. Tuck"
    assert row["action"] == "Declare"
    assert row["resource"] == "Admin-log"
    assert row["status"] == "fulfilled"
    assert row["start"] == "{act: Read, obj: Rec(J. Lewis), subj: C. Tuck, time: 120}"
    assert row["end"] is None
    assert row["fulfilling"] == "{act: Declare, obj: Admin-log, subj: C. Tuck, time: 200}"
    assert row["origin"] == "(Declare, Admin-log, gen_read[C. Tuck, J. Lewis], ⊥)"
    json.dumps(rows)


def test_query_duties_filters():
    st, _ = SimulationState.fresh(example1()).replay(example1_events()[:1])
    assert query_duties(st, status="pending")
    assert query_duties(st, status="fulfilled") == ()
    assert query_duties(st, principal="C. Tuck")
    assert query_duties(st, principal="J. Dorian") == ()
    assert query_duties(st, principal="C. Tuck", status="violated") == ()


def test_query_duties_matches_duty_states():
    rng = random.Random(97)
    busy = 0
    for _ in range(40):
        doc = random_policy_doc(rng)
        st = SimulationState.fresh(policy_from_doc(doc))
        st, _ = st.replay(doc.get("events", []))
        rows = query_duties(st)
        states = st.duty_states()
        assert len(rows) == len(states)
        assert sorted(r["status"] for r in rows) == sorted(s.status for s in states)
        for status in ("pending", "fulfilled", "violated"):
            expected = [s for s in states if s.status == status]
            assert len(query_duties(st, status=status)) == len(expected)
        busy += bool(rows)
    assert busy >= 5
