// A decide response justifies its verdict with a chain of graph node ids.
// This turns that chain into the node and edge sets the canvas lights up.

import type { Decision, GraphDoc, Verdict } from "./types.js";

export interface Highlight {
  verdict: Verdict;
  nodes: Set<number>;
  edges: Set<number>;
  note: string | null;
}

export const decisionHighlight = (decision: Decision, doc: GraphDoc): Highlight => {
  if (typeof decision.justification === "string") {
    return {
      verdict: decision.verdict,
      nodes: new Set(),
      edges: new Set(),
      note: decision.justification,
    };
  }
  const chain = decision.justification.map((j) => j.id);
  const nodes = new Set(chain);
  const edges = new Set<number>();
  for (let i = 0; i + 1 < chain.length; i += 1) {
    const a = chain[i];
    const b = chain[i + 1];
    for (const e of doc.edges) {
      const joins =
        (e.from.node === a && e.to.node === b) ||
        (e.from.node === b && e.to.node === a);
      if (joins) edges.add(e.id);
    }
  }
  return { verdict: decision.verdict, nodes, edges, note: null };
};
