// Flattens the server's derivation tree into outline rows for the sidebar.
// Nodes are visited depth-first so branches read top to bottom; within one
// session the tree is usually a chain (forks live in their own sessions).

import type { DerivationDoc, DerivationStep } from "./types.js";

export interface OutlineRow {
  node: number;
  kind: "root" | "event" | "rule";
  label: string;
  depth: number;
  events: number;
  duties: number;
  current: boolean;
}

// "{act: ..., time: ...}" payloads compress to "Read @ 120 · C. Tuck";
// anything less regular falls back to its sorted fields.
export const eventSummary = (label: string): string => {
  let fields: Record<string, unknown>;
  try {
    fields = JSON.parse(label) as Record<string, unknown>;
  } catch {
    return label;
  }
  if (fields === null || typeof fields !== "object" || Array.isArray(fields)) {
    return label;
  }
  const { act, time, subj } = fields;
  if (typeof act === "string" && (typeof time === "number" || typeof time === "string")) {
    const who = typeof subj === "string" ? ` · ${subj}` : "";
    return `${act} @ ${time}${who}`;
  }
  return Object.keys(fields)
    .sort()
    .map((k) => `${k}: ${String(fields[k])}`)
    .join(", ");
};

export const outline = (doc: DerivationDoc): OutlineRow[] => {
  const stats = new Map(doc.nodes.map((n) => [n.node, n]));
  const incoming = new Map<number, DerivationStep>();
  const children = new Map<number, number[]>();
  for (const step of doc.steps) {
    incoming.set(step.child, step);
    const kids = children.get(step.parent) ?? [];
    kids.push(step.child);
    children.set(step.parent, kids);
  }

  const rows: OutlineRow[] = [];
  const visit = (node: number, depth: number): void => {
    const step = incoming.get(node);
    const info = stats.get(node);
    rows.push({
      node,
      kind: step ? step.kind : "root",
      label: step
        ? step.kind === "event"
          ? eventSummary(step.label)
          : step.label
        : "start",
      depth,
      events: info?.events ?? 0,
      duties: info?.duties ?? 0,
      current: node === doc.current,
    });
    for (const child of (children.get(node) ?? []).sort((a, b) => a - b)) {
      visit(child, depth + 1);
    }
  };
  visit(0, 0);
  return rows;
};
