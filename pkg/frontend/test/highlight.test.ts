import { describe, expect, it } from "vitest";

import { decisionHighlight } from "../src/highlight.js";
import type { Decision, GraphDoc } from "../src/types.js";
import { fixture } from "./helpers.js";

const graph = fixture<GraphDoc>("example1_graph.json");
const grant = fixture<Decision>("decide_grant.json");
const undetermined = fixture<Decision>("decide_undetermined.json");

describe("a granting decision", () => {
  const hl = decisionHighlight(grant, graph);

  it("lights up exactly the justifying chain of nodes", () => {
    expect(hl.verdict).toBe("grant");
    expect(Array.from(hl.nodes).sort((a, b) => a - b)).toEqual([2, 8, 40]);
    expect(hl.note).toBeNull();
  });

  it("lights up the edges joining consecutive chain nodes", () => {
    expect(Array.from(hl.edges).sort((a, b) => a - b)).toEqual([39, 44]);
  });

  it("follows the principal, their category, and the permission", () => {
    const labels = (grant.justification as Array<{ label: string }>).map(
      (j) => j.label,
    );
    expect(labels).toEqual(["C. Tuck", "Dr(F. Mason)", "(Read, Rec(F. Mason))"]);
  });

  it("every highlighted id exists in the graph payload", () => {
    const nodeIds = new Set(graph.nodes.map((n) => n.id));
    const edgeIds = new Set(graph.edges.map((e) => e.id));
    for (const id of hl.nodes) expect(nodeIds.has(id)).toBe(true);
    for (const id of hl.edges) expect(edgeIds.has(id)).toBe(true);
  });
});

describe("an undetermined decision", () => {
  it("highlights nothing and keeps the explanation", () => {
    const hl = decisionHighlight(undetermined, graph);
    expect(hl.verdict).toBe("undetermined");
    expect(hl.nodes.size).toBe(0);
    expect(hl.edges.size).toBe(0);
    expect(hl.note).toContain("not part of the policy");
  });
});

describe("odd chains", () => {
  it("copes with justification nodes that share no edge", () => {
    const decision: Decision = {
      verdict: "grant",
      justification: [
        { id: 0, label: "a" },
        { id: 59, label: "b" },
      ],
    };
    const hl = decisionHighlight(decision, graph);
    expect(hl.nodes).toEqual(new Set([0, 59]));
    expect(hl.edges.size).toBe(0);
  });

  it("treats a single-node justification as just that node", () => {
    const decision: Decision = {
      verdict: "deny",
      justification: [{ id: 2, label: "C. Tuck" }],
    };
    const hl = decisionHighlight(decision, graph);
    expect(hl.verdict).toBe("deny");
    expect(hl.nodes).toEqual(new Set([2]));
    expect(hl.edges.size).toBe(0);
  });
});
