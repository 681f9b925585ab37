"""Built-in rewrite rules and the assignment-saturation strategy.

The single shipped rule, ``auxPC``, extends principal-to-category
assignment one subsumption step at a time: a principal assigned to a
category that is subsumed (``auth``-wise) by a wider one gains an
auxiliary assignment edge to the wider category.  Auxiliary edges are
invisible to validation and extraction, so saturating a graph never
changes what it means — it only caches the closure of assignment under
subsumption so that authorisation questions become single-edge lookups.

``SATURATION_SCRIPT`` drives the rule breadth-first, one principal at a
time: all principals start banned, one is picked into the position
together with its directly assigned categories, and each round matches
only the frontier reached in the previous round (newly reached
categories are banned for the rest of the round, then released as the
next frontier).  The sweep assumes the subsumption graph is acyclic;
on a cyclic hierarchy the frontier oscillates and the interpreter's
budget is what stops it.
"""

from __future__ import annotations

from .policy import as_policy, node_record
from .portgraph import (
    ArrowPort, GraphBuilder, LocatedGraph, LocatedRule, PortGraph, Record,
    RewriteRule, Var,
)
from .strategy import StrategyResult, run_strategy

SATURATION_SCRIPT = """\
setBan(all(property(crtGraph,node,type=="P")));
while(not(isEmpty(crtBan)))do(
  setPos(one(crtBan));
  setBan(all(crtBan\\crtPos));
  setPos(all(crtPos[cup]ngb(crtPos,edge,type=="PC")));
  while(one(auxPC))do(
    repeat(one(auxPC));
    setPos(all(
    property(crtPos,node,type=="P")[cup]property(crtBan,node,type=="C")
    ));
    setBan(all(property(crtBan,node,type=="P")))
))
"""


def _assignment_side(builder: GraphBuilder) -> dict[str, int]:
    """One principal, a category it sits in, and a wider category."""
    ids: dict[str, int] = {}
    ids["p"] = builder.add_node(node_record("P", Var("X")))
    ids["p.Main"] = builder.add_port(ids["p"], Record(Name="Main"))
    for c, ent in (("c1", Var("Y")), ("c2", Var("Z"))):
        ids[c] = builder.add_node(node_record("C", ent))
        for pname in ("Main", "In", "Out"):
            ids[f"{c}.{pname}"] = builder.add_port(ids[c], Record(Name=pname))
    ids["pc"] = builder.add_edge(
        ids["p.Main"], ids["c1.Main"],
        Record(Name="PC", type="PC", aux=Var("A1")),
    )
    ids["cc"] = builder.add_edge(
        ids["c1.Out"], ids["c2.In"],
        Record(Name="CC", type="CC", aux=Var("A2"), auth=True, obl=Var("O1")),
    )
    return ids


def aux_pc_rule() -> LocatedRule:
    """One assignment-extension step as a located rewrite rule.

    The left side is ``P —PC— C —CC(auth)→ C``; the right side rebuilds
    it and adds an auxiliary PC edge from the principal to the wider
    category.  All boundary ports are bridged, so edges outside the
    match survive.  The position bookkeeping makes the strategy's
    breadth-first sweep work: a match must overlap the position in
    exactly the principal and the narrower category, the rebuilt pair
    stays in position, and the newly reached category is banned.
    """
    lb = GraphBuilder()
    lhs_ids = _assignment_side(lb)
    lhs = lb.finish()

    rb = GraphBuilder()
    rhs_ids = _assignment_side(rb)
    rhs_ids["pc_aux"] = rb.add_edge(
        rhs_ids["p.Main"], rhs_ids["c2.Main"],
        Record(Name="PC", type="PC", aux=True),
    )
    rhs = rb.finish()

    bridges = tuple(
        ArrowPort("bridge", (lhs_ids[key],), (rhs_ids[key],))
        for key in ("p.Main", "c1.Main", "c1.In", "c1.Out",
                    "c2.Main", "c2.In", "c2.Out")
    )
    rule = RewriteRule(lhs=lhs, rhs=rhs, arrow=bridges, name="auxPC")
    return LocatedRule(
        rule,
        where_lhs=frozenset({lhs_ids["p"], lhs_ids["c1"]}),
        pos_rhs=frozenset({rhs_ids["p"], rhs_ids["c1"]}),
        ban_rhs=frozenset({rhs_ids["c2"]}),
    )


def builtin_rules() -> dict[str, LocatedRule]:
    return {"auxPC": aux_pc_rule()}


def saturate(graph: PortGraph, seed: int | None = None,
             budget: int = 10_000) -> StrategyResult:
    """Run the assignment-saturation strategy over a policy graph."""
    return run_strategy(
        SATURATION_SCRIPT, LocatedGraph.whole(graph), builtin_rules(),
        budget=budget, seed=seed,
    )


def assignment_pairs(graph: PortGraph) -> frozenset[tuple[object, object]]:
    """All (principal, category) pairs joined by a PC edge, auxiliary included."""
    pg = as_policy(graph)
    pairs = set()
    for e in pg.edges_of_type("PC", include_aux=True):
        p, c = pg.typed_ends(e)
        pairs.add((pg.ent(p), pg.ent(c)))
    return frozenset(pairs)
