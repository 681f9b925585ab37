"""Engine matching vs. brute-force enumeration on random host/rule pairs."""

from __future__ import annotations

import random

from cbaco.portgraph import apply_rule, match_rule
from generators import random_host, random_rule
from oracles import enumerate_matches, graph_invariants

PAIRS = 250


def test_match_rule_agrees_with_exhaustive_enumeration():
    rng = random.Random(20210)
    checked = 0
    matched_pairs = 0
    for _ in range(PAIRS):
        host = random_host(rng)
        rule = random_rule(rng)
        got = match_rule(host, rule)
        want = enumerate_matches(host, rule)
        assert got == want, f"disagreement on host={host.to_json_dict()} rule={rule.name}"
        checked += 1
        if got:
            matched_pairs += 1
    assert checked == PAIRS
    assert matched_pairs >= PAIRS // 10  # generator produces enough positive cases


def test_every_application_preserves_graph_invariants():
    rng = random.Random(977)
    applications = 0
    for _ in range(PAIRS):
        host = random_host(rng)
        rule = random_rule(rng)
        for f in match_rule(host, rule)[:3]:
            g2 = apply_rule(host, rule, f)
            graph_invariants(g2)
            # surviving old ids belong to the host; fresh ids start at host.next_id
            for i in g2.elements():
                if i < host.next_id:
                    assert host.has(i)
            assert g2.next_id >= host.next_id
            applications += 1
    assert applications >= 40
