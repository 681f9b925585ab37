import { describe, expect, it } from "vitest";

import { eventSummary, outline } from "../src/derivation.js";
import type { DerivationDoc } from "../src/types.js";
import { fixture } from "./helpers.js";

const eventTree = fixture<DerivationDoc>("derivation_events.json");
const ruleTree = fixture<DerivationDoc>("derivation_strategy.json");

describe("outline of an event history", () => {
  const rows = outline(eventTree);

  it("walks root to head in order", () => {
    expect(rows.map((r) => r.node)).toEqual([0, 1, 2]);
    expect(rows.map((r) => r.kind)).toEqual(["root", "event", "event"]);
    expect(rows.map((r) => r.depth)).toEqual([0, 1, 2]);
  });

  it("marks only the head as current", () => {
    expect(rows.filter((r) => r.current).map((r) => r.node)).toEqual([2]);
  });

  it("summarises event payloads", () => {
    expect(rows[0].label).toBe("start");
    expect(rows[1].label).toBe("Read @ 120 · C. Tuck");
    expect(rows[2].label).toBe("Declare @ 200 · C. Tuck");
  });

  it("carries the event and duty counts alongside", () => {
    expect(rows.map((r) => [r.events, r.duties])).toEqual([
      [0, 0],
      [1, 1],
      [2, 1],
    ]);
  });
});

describe("outline of a strategy run", () => {
  it("adds one row per rule application", () => {
    const rows = outline(ruleTree);
    expect(rows).toHaveLength(4);
    expect(rows.slice(1).map((r) => r.kind)).toEqual(["rule", "rule", "rule"]);
    expect(rows.slice(1).map((r) => r.label)).toEqual(["auxPC", "auxPC", "auxPC"]);
    expect(rows[3].current).toBe(true);
  });
});

describe("eventSummary", () => {
  it("passes through labels that are not JSON", () => {
    expect(eventSummary("auxPC")).toBe("auxPC");
  });

  it("falls back to sorted fields without an act and a time", () => {
    expect(eventSummary('{"b": 2, "a": "x"}')).toBe("a: x, b: 2");
  });

  it("leaves JSON scalars alone", () => {
    expect(eventSummary("42")).toBe("42");
    expect(eventSummary("[1, 2]")).toBe("[1, 2]");
  });
});

describe("branched trees", () => {
  it("indents children under their parent, ordered by node id", () => {
    const doc: DerivationDoc = {
      current: 2,
      nodes: [
        { node: 0, events: 0, duties: 0 },
        { node: 1, events: 1, duties: 0 },
        { node: 2, events: 1, duties: 0 },
      ],
      steps: [
        { parent: 0, child: 2, kind: "rule", label: "late" },
        { parent: 0, child: 1, kind: "rule", label: "early" },
      ],
    };
    const rows = outline(doc);
    expect(rows.map((r) => r.node)).toEqual([0, 1, 2]);
    expect(rows.map((r) => r.depth)).toEqual([0, 1, 1]);
  });
});
