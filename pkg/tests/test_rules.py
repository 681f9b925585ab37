"""The assignment-saturation rule and its driving strategy."""

from __future__ import annotations

import random

import pytest

from cbaco.policy import PolicyBuilder, as_policy, extract_policy, validate
from cbaco.portgraph import apply_rule, match_rule
from cbaco.rules import (
    SATURATION_SCRIPT, assignment_pairs, aux_pc_rule, builtin_rules, saturate,
)
from cbaco.strategy import BudgetExceeded, parse_strategy
from cbaco.workspace import policy_from_doc
from oracles import transitive_pairs


def ladder(*, auth_steps, obl_steps=(), pca=(("ana", "c0"),)) -> object:
    pb = PolicyBuilder()
    cats = {c for step in (*auth_steps, *obl_steps) for c in step}
    for p, c in pca:
        cats.add(c)
        pb.principal(p)
    for c in sorted(cats):
        pb.category(c)
    merged = {}
    for a, b in auth_steps:
        merged[(a, b)] = [True, False]
    for a, b in obl_steps:
        merged.setdefault((a, b), [False, False])[1] = True
    for (a, b), (auth, obl) in merged.items():
        pb.cc(a, b, auth=auth, obl=obl)
    for p, c in pca:
        pb.pc(p, c)
    return pb.finish()


def test_rule_constructs_and_script_matches_the_fixture():
    lrule = aux_pc_rule()
    assert lrule.rule.name == "auxPC"
    assert len(lrule.rule.lhs.nodes) == 3 and len(lrule.rule.rhs.edges) == 3
    parse_strategy(SATURATION_SCRIPT)
    with open("fixtures/auxpc.strat") as fh:
        assert fh.read().strip() == SATURATION_SCRIPT.strip()
    assert set(builtin_rules()) == {"auxPC"}


def test_single_step_adds_one_auxiliary_assignment():
    g = ladder(auth_steps=[("c0", "c1")])
    lrule = aux_pc_rule()
    matches = match_rule(g, lrule.rule)
    assert len(matches) == 1
    g2 = apply_rule(g, lrule.rule, matches[0])
    assert validate(g2) == []
    pg2 = as_policy(g2)
    assert len(pg2.edges_of_type("PC")) == 1
    assert len(pg2.edges_of_type("PC", include_aux=True)) == 2
    # the cached closure changes nothing the graph asserts
    assert extract_policy(g2) == extract_policy(g)
    assert assignment_pairs(g2) == {("ana", "c0"), ("ana", "c1")}


def test_rule_ignores_obligation_only_subsumption():
    g = ladder(auth_steps=[], obl_steps=[("c0", "c1")], pca=(("ana", "c0"),))
    assert match_rule(g, aux_pc_rule().rule) == []


def test_rule_ignores_two_way_subsumption_edges():
    pb = PolicyBuilder()
    pb.principal("ana")
    pb.category("c0")
    pb.category("c1")
    pb.cc("c0", "c1", auth=True, bidirectional=True)
    pb.pc("ana", "c0")
    assert match_rule(pb.finish(), aux_pc_rule().rule) == []


def test_saturation_walks_a_chain():
    g = ladder(auth_steps=[("c0", "c1"), ("c1", "c2"), ("c2", "c3")])
    result = saturate(g)
    assert assignment_pairs(result.state.graph) == {
        ("ana", c) for c in ("c0", "c1", "c2", "c3")
    }
    assert len(result.steps) == 3
    assert validate(result.state.graph) == []


def test_saturation_covers_a_diamond_once_per_pair():
    g = ladder(auth_steps=[("c0", "l"), ("c0", "r"), ("l", "top"), ("r", "top")])
    result = saturate(g)
    assert assignment_pairs(result.state.graph) == {
        ("ana", c) for c in ("c0", "l", "r", "top")
    }


def test_saturation_handles_each_principal_separately():
    g = ladder(
        auth_steps=[("c0", "c1"), ("c2", "c3")],
        pca=(("ana", "c0"), ("bob", "c2"), ("cleo", "c3")),
    )
    pairs = assignment_pairs(saturate(g).state.graph)
    assert pairs == {
        ("ana", "c0"), ("ana", "c1"),
        ("bob", "c2"), ("bob", "c3"),
        ("cleo", "c3"),
    }


def test_saturation_diverges_on_a_subsumption_cycle():
    g = ladder(auth_steps=[("c0", "c1"), ("c1", "c2"), ("c2", "c0")])
    with pytest.raises(BudgetExceeded):
        saturate(g, budget=300)


def random_hierarchy(rng: random.Random) -> dict:
    n = rng.randint(2, 6)
    cats = [f"c{i}" for i in range(n)]
    cc_auth = [
        [cats[i], cats[j]]
        for i in range(n) for j in range(i + 1, n)
        if rng.random() < 0.35
    ]
    cc_obl = [
        [cats[i], cats[j]]
        for i in range(n) for j in range(i + 1, n)
        if rng.random() < 0.15
    ]
    principals = [f"p{i}" for i in range(rng.randint(1, 3))]
    pca = [[p, rng.choice(cats)] for p in principals]
    return {
        "principals": principals,
        "categories": cats,
        "pca": pca,
        "cc_auth": cc_auth,
        "cc_obl": cc_obl,
    }


def expected_closure(doc: dict) -> frozenset[tuple[str, str]]:
    order = transitive_pairs(tuple((a, b) for a, b in doc["cc_auth"]))
    out = set()
    for p, c in doc["pca"]:
        out.add((p, c))
        out.update((p, c2) for c1, c2 in order if c1 == c)
    return frozenset(out)


def test_saturation_agrees_with_the_relational_closure():
    rng = random.Random(2112)
    deep = 0
    for _ in range(40):
        doc = random_hierarchy(rng)
        g = policy_from_doc(doc)
        result = saturate(g)
        assert assignment_pairs(result.state.graph) == expected_closure(doc)
        # saturation introduces no violations beyond those the input had
        # (random drafts may carry redundant subsumption edges of their own)
        before = sorted(v.code for v in validate(g))
        after = sorted(v.code for v in validate(result.state.graph))
        assert after == before
        if len(result.steps) > len(doc["pca"]):
            deep += 1
    assert deep >= 5  # the sample exercises multi-step walks, not just no-ops


def test_saturation_is_deterministic_for_a_fixed_seed():
    doc = {
        "principals": ["p0", "p1"],
        "categories": ["c0", "c1", "c2", "c3"],
        "pca": [["p0", "c0"], ["p1", "c1"]],
        "cc_auth": [["c0", "c1"], ["c0", "c2"], ["c1", "c3"], ["c2", "c3"]],
    }
    runs = set()
    for _ in range(10):
        result = saturate(policy_from_doc(doc), seed=77)
        runs.add((
            tuple(s.match for s in result.steps),
            assignment_pairs(result.state.graph),
        ))
    assert len(runs) == 1
