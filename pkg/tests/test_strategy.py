"""Strategy language tests: parsing, printing, and interpreter semantics."""

from __future__ import annotations

import pathlib

import pytest

from cbaco.portgraph import (
    GraphBuilder, LocatedGraph, LocatedRule, Record, RewriteRule, canonical_form,
)
from cbaco.strategy import (
    All, BudgetExceeded, CrtBan, CrtGraph, CrtPos, DerivationTree, Diff, IsEmpty,
    Ngb, Not, One, Pred, Property, Repeat, RuleApp, Seq, SetBan, SetPos,
    StrategyFailed, StrategySyntaxError, UnknownRule, While, Union,
    parse_strategy, pretty, run_strategy,
)

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


# ----------------------------------------------------------------------
# parsing
# ----------------------------------------------------------------------


def test_parse_simple_statements():
    ast = parse_strategy('setPos(all(crtGraph));setBan(one(crtBan));myRule')
    assert ast == Seq((
        SetPos(All(CrtGraph())),
        SetBan(One(CrtBan())),
        RuleApp("myRule"),
    ))


def test_parse_set_operators_left_associative():
    ast = parse_strategy('setPos(all(crtPos[cup]crtBan\\crtPos))')
    expr = ast.steps[0].expr.expr
    assert expr == Diff(Union(CrtPos(), CrtBan()), CrtPos())


def test_parse_unicode_union():
    a = parse_strategy('setPos(all(crtPos∪crtBan))')
    b = parse_strategy('setPos(all(crtPos[cup]crtBan))')
    assert a == b


def test_parse_ngb_and_property():
    ast = parse_strategy('setPos(all(ngb(crtPos,edge,type=="PC")[cup]property(crtGraph,node,type=="P")))')
    expr = ast.steps[0].expr.expr
    assert expr == Union(
        Ngb(CrtPos(), "edge", Pred("type", "PC")),
        Property(CrtGraph(), "node", Pred("type", "P")),
    )


def test_parse_while_repeat_not_isempty():
    ast = parse_strategy('while(not(isEmpty(crtBan)))do(repeat(one(r));setPos(all(crtPos)))')
    w = ast.steps[0]
    assert isinstance(w, While)
    assert w.cond == Not(IsEmpty(CrtBan()))
    assert w.body == Seq((Repeat(Seq((RuleApp("r"),))), SetPos(All(CrtPos()))))


def test_parse_numeric_and_boolean_predicates():
    ast = parse_strategy('setPos(all(property(crtGraph,node,aux==true)[cup]property(crtGraph,node,n==3)))')
    expr = ast.steps[0].expr.expr
    assert expr.left.pred == Pred("aux", True)
    assert expr.right.pred == Pred("n", 3)


def test_parse_rejects_all_as_statement():
    with pytest.raises(StrategySyntaxError):
        parse_strategy('all(crtPos)')


def test_parse_rejects_one_of_set_as_statement():
    with pytest.raises(StrategySyntaxError):
        parse_strategy('one(crtPos)')


def test_parse_rejects_property_over_edges():
    with pytest.raises(StrategySyntaxError):
        parse_strategy('setPos(all(property(crtGraph,edge,type=="PC")))')


def test_syntax_errors_carry_positions():
    with pytest.raises(StrategySyntaxError) as exc:
        parse_strategy('setPos(all(crtPos)\nsetBan(all(crtPos))')
    assert exc.value.line == 2
    with pytest.raises(StrategySyntaxError) as exc:
        parse_strategy('setPos(all("unclosed))')
    assert "string" in str(exc.value)


def test_bundled_script_parses_and_round_trips():
    src = (FIXTURES / "auxpc.strat").read_text()
    ast = parse_strategy(src)
    assert parse_strategy(pretty(ast)) == ast
    # spot-check the overall shape: a ban of every principal, then a loop
    assert isinstance(ast.steps[0], SetBan)
    assert isinstance(ast.steps[1], While)
    inner = ast.steps[1].body
    assert isinstance(inner.steps[-1], While)
    assert inner.steps[-1].cond == RuleApp("auxPC")


# ----------------------------------------------------------------------
# interpreter
# ----------------------------------------------------------------------


def b_to_a_rule(name="b2a"):
    lb = GraphBuilder()
    lb.add_node(Record(Name="B"))
    lhs = lb.finish()
    rb = GraphBuilder()
    rb.add_node(Record(Name="A", kind="w"))
    rhs = rb.finish()
    return LocatedRule.plain(RewriteRule(lhs, rhs, name=name))


def never_rule():
    lb = GraphBuilder()
    lb.add_node(Record(Name="Z"))
    lhs = lb.finish()
    return LocatedRule.plain(RewriteRule(lhs, lhs, name="never"))


def two_b_graph():
    b = GraphBuilder()
    b.add_node(Record(Name="B"))
    b.add_node(Record(Name="B"))
    return LocatedGraph.whole(b.finish())


RULES = {"b2a": b_to_a_rule(), "never": never_rule()}


def test_rule_application_uses_first_admissible_match():
    lg = two_b_graph()
    res = run_strategy("one(b2a)", lg, RULES)
    assert len(res.steps) == 1
    assert res.steps[0].rule == "b2a"
    # node 0 was rewritten, node 1 survives
    assert 1 in res.state.graph.nodes
    assert 0 not in res.state.graph.nodes


def test_bare_rule_name_is_an_application():
    lg = two_b_graph()
    assert len(run_strategy("b2a", lg, RULES).steps) == 1


def test_repeat_applies_until_failure_and_succeeds():
    lg = two_b_graph()
    res = run_strategy("repeat(one(b2a))", lg, RULES)
    assert len(res.steps) == 2
    names = {res.state.graph.node_record(n).name for n in res.state.graph.nodes}
    assert names == {"A"}


def test_failed_application_raises_with_state():
    lg = two_b_graph()
    with pytest.raises(StrategyFailed) as exc:
        run_strategy("one(never)", lg, RULES)
    assert exc.value.state.graph is lg.graph


def test_unknown_rule():
    with pytest.raises(UnknownRule):
        run_strategy("one(ghost)", two_b_graph(), RULES)


def test_budget_exceeded_on_non_failing_loop():
    lg = two_b_graph()
    with pytest.raises(BudgetExceeded):
        run_strategy("repeat(setPos(all(crtGraph)))", lg, RULES, budget=50)


def test_repeat_rolls_back_partial_iterations():
    # each iteration applies b2a then requires the impossible rule; the
    # failing iteration must leave no trace, so nothing is ever rewritten
    lg = two_b_graph()
    res = run_strategy("repeat(one(b2a);one(never))", lg, RULES)
    assert res.steps == ()
    assert res.state.graph is lg.graph


def test_while_condition_effects_are_kept_on_success():
    lg = two_b_graph()
    res = run_strategy("while(one(b2a))do(setPos(all(crtPos)))", lg, RULES)
    assert len(res.steps) == 2


def test_while_condition_failure_discards_state():
    lg = two_b_graph()
    res = run_strategy("while(one(never))do(setBan(all(crtGraph)))", lg, RULES)
    assert res.state == lg
    assert res.steps == ()


def test_banned_nodes_are_not_rewritten():
    lg0 = two_b_graph()
    g = lg0.graph
    banned = frozenset({0} | set(g.node_ports(0)))
    lg = LocatedGraph(g, position=lg0.position, banned=banned)
    res = run_strategy("one(b2a)", lg, RULES)
    assert 0 in res.state.graph.nodes  # only the unbanned node was touched
    assert 1 not in res.state.graph.nodes


def test_setpos_setban_and_set_expressions():
    b = GraphBuilder()
    n0 = b.add_node(Record(Name="P", type="P"))
    n1 = b.add_node(Record(Name="C", type="C"))
    n2 = b.add_node(Record(Name="C", type="C"))
    p0 = b.add_port(n0, Record(Name="Main"))
    p1 = b.add_port(n1, Record(Name="Main"))
    p2 = b.add_port(n1, Record(Name="Main"))
    p3 = b.add_port(n2, Record(Name="Main"))
    b.add_edge(p0, p1, Record(Name="PC", type="PC"))
    b.add_edge(p2, p3, Record(Name="CC", type="CC"))
    lg = LocatedGraph.whole(b.finish())

    res = run_strategy('setPos(all(property(crtGraph,node,type=="P")))', lg, {})
    assert res.state.position == frozenset({n0})

    res = run_strategy(
        'setPos(all(property(crtGraph,node,type=="P")));'
        'setPos(all(crtPos[cup]ngb(crtPos,edge,type=="PC")))',
        lg, {},
    )
    assert res.state.position == frozenset({n0, n1})

    res = run_strategy(
        'setBan(all(property(crtGraph,node,type=="C")));'
        'setPos(one(crtBan));'
        'setBan(all(crtBan\\crtPos))',
        lg, {},
    )
    assert res.state.position == frozenset({n1})
    assert res.state.banned == frozenset({n2})

    res = run_strategy('setPos(all(ngb(property(crtGraph,node,type=="P"),node,type=="C")))', lg, {})
    assert res.state.position == frozenset({n1})


def test_one_over_empty_set_fails():
    lg = two_b_graph()
    with pytest.raises(StrategyFailed):
        run_strategy('setPos(one(property(crtGraph,node,type=="X")))', lg, RULES)


def test_seeded_runs_are_reproducible():
    lg = two_b_graph()
    a = run_strategy("repeat(one(b2a))", lg, RULES, seed=7)
    b = run_strategy("repeat(one(b2a))", lg, RULES, seed=7)
    assert [s.match for s in a.steps] == [s.match for s in b.steps]
    assert canonical_form(a.state.graph) == canonical_form(b.state.graph)


def test_derivation_tree_basics():
    lg = two_b_graph()
    tree = DerivationTree(lg)
    res = run_strategy("one(b2a)", lg, RULES)
    child = tree.add(tree.root, res.state, "rule", f"b2a@{res.steps[0].match}")
    assert len(tree) == 2
    assert tree.children(tree.root) == [child]
    with pytest.raises(ValueError):
        tree.add(99, res.state, "rule", "x")
