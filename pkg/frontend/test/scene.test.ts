import { describe, expect, it } from "vitest";

import {
  FALLBACK_COLOR,
  NODE_FILL,
  NODE_RADIUS,
  SHAPES,
  computeScene,
  shapeCensus,
  LEGEND,
  type EdgeItem,
  type NodeItem,
} from "../src/scene.js";
import type { GraphDoc, GraphNode } from "../src/types.js";
import { fixture } from "./helpers.js";

const example1 = fixture<GraphDoc>("example1_graph.json");
const afterEvents = fixture<GraphDoc>("graph_after_events.json");
const emptyGraph = fixture<GraphDoc>("empty_graph.json");
const fullView = fixture<GraphDoc>("hier_graph_full.json");

const nodeItems = (doc: GraphDoc, opts = {}): NodeItem[] =>
  computeScene(doc, opts).items.filter((i): i is NodeItem => i.kind === "node");

const edgeItems = (doc: GraphDoc, opts = {}): EdgeItem[] =>
  computeScene(doc, opts).items.filter((i): i is EdgeItem => i.kind === "edge");

describe("shape census", () => {
  it("counts the worked example exactly", () => {
    expect(computeScene(example1).census).toEqual({
      Pentagon: 2,
      Triangle: 2,
      Hexagon: 5,
      Square: 2,
      Diamond: 3,
      Circle: 2,
      Ring: 2,
    });
  });

  it("shows the duty that appeared after the event log ran", () => {
    const fresh = fixture<GraphDoc>("fresh_graph.json");
    expect(computeScene(fresh).census.Hexagon).toBe(5);
    expect(computeScene(afterEvents).census.Hexagon).toBe(6);

    const before = new Set(fresh.nodes.map((n) => n.id));
    const added = afterEvents.nodes.filter((n) => !before.has(n.id));
    const duties = added.filter((n) => n.type === "D");
    expect(duties).toHaveLength(1);
    expect(duties[0].shape).toBe("Hexagon");
    expect(duties[0].label).toContain("Declare");
  });

  it("is all zeroes for an empty policy", () => {
    const census = shapeCensus(emptyGraph.nodes);
    for (const shape of SHAPES) expect(census[shape]).toBe(0);
  });
});

describe("node placement", () => {
  it("renders every node with one or three ports", () => {
    for (const item of nodeItems(example1)) {
      expect([1, 3]).toContain(item.ports.length);
      if (item.ports.length === 3) {
        expect(item.ports.map((p) => p.name)).toEqual(["Main", "In", "Out"]);
      } else {
        expect(item.ports[0].name).toBe("Main");
      }
    }
  });

  it("keeps In on the left and Out on the right of the glyph", () => {
    const withThree = nodeItems(example1).find((n) => n.ports.length === 3)!;
    const by = Object.fromEntries(withThree.ports.map((p) => [p.name, p]));
    expect(by.In.x).toBeLessThan(withThree.x);
    expect(by.Out.x).toBeGreaterThan(withThree.x);
    expect(by.Main.y).toBeGreaterThan(withThree.y);
  });

  it("takes fills from the payload colours, never recomputing them", () => {
    for (const item of nodeItems(example1)) {
      const wire = example1.nodes.find((n) => n.id === item.id)!;
      expect(item.fill).toBe(NODE_FILL[wire.color]);
    }
  });

  it("falls back to a neutral fill for colours it has never seen", () => {
    const odd: GraphDoc = {
      at: 0,
      edges: [],
      nodes: [
        {
          id: 1,
          type: "P",
          label: "x",
          shape: "Pentagon",
          ports: 1,
          color: "ultraviolet",
        } as GraphNode,
      ],
    };
    expect(nodeItems(odd)[0].fill).toBe(FALLBACK_COLOR);
  });

  it("never overlaps two nodes", () => {
    const seen = new Set<string>();
    for (const item of nodeItems(afterEvents)) {
      const key = `${item.x},${item.y}`;
      expect(seen.has(key)).toBe(false);
      seen.add(key);
    }
  });
});

describe("edges", () => {
  it("draws every edge of the worked example", () => {
    expect(edgeItems(example1)).toHaveLength(example1.edges.length);
  });

  it("anchors an Out-to-In edge at those ports, not at Main", () => {
    const wire = example1.edges.find((e) => e.from.port === "Out")!;
    const item = edgeItems(example1).find((e) => e.id === wire.id)!;
    const from = nodeItems(example1).find((n) => n.id === wire.from.node)!;
    expect(item.x1).toBeCloseTo(from.x + NODE_RADIUS + 5);
    expect(item.arrow).toBe(true);
  });

  it("marks aux edges from the full view and keeps their colours", () => {
    const auxWire = fullView.edges.filter((e) => e.aux === true);
    expect(auxWire.length).toBeGreaterThan(0);
    const items = edgeItems(fullView);
    for (const wire of auxWire) {
      const item = items.find((e) => e.id === wire.id)!;
      expect(item.aux).toBe(true);
      expect(item.color).toBe(wire.color);
    }
  });
});

describe("filters and highlights", () => {
  it("hides node types and the edges that touch them", () => {
    const scene = computeScene(example1, { hide: ["E", "G"] });
    expect(scene.census.Circle).toBe(0);
    expect(scene.census.Ring).toBe(0);

    const hiddenIds = new Set(
      example1.nodes.filter((n) => n.type === "E" || n.type === "G").map((n) => n.id),
    );
    const expected = example1.edges.filter(
      (e) => !hiddenIds.has(e.from.node) && !hiddenIds.has(e.to.node),
    );
    expect(scene.items.filter((i) => i.kind === "edge")).toHaveLength(expected.length);
  });

  it("flags requested nodes and edges as highlighted", () => {
    const scene = computeScene(example1, {
      highlightNodes: [2, 8],
      highlightEdges: [39],
    });
    const lit = scene.items.filter(
      (i) => (i.kind === "node" || i.kind === "edge") && i.highlighted,
    );
    expect(lit.map((i) => i.id).sort((a, b) => a - b)).toEqual([2, 8, 39]);
  });
});

describe("determinism", () => {
  it("produces an identical scene for an identical payload", () => {
    const a = computeScene(example1, { highlightNodes: [2], hide: ["G"] });
    const b = computeScene(example1, { highlightNodes: [2], hide: ["G"] });
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
  });

  it("keeps an empty canvas truly empty, while the legend stands alone", () => {
    const scene = computeScene(emptyGraph);
    expect(scene.items).toEqual([]);
    expect(scene.width).toBeGreaterThan(0);
    expect(scene.height).toBeGreaterThan(0);
    expect(LEGEND).toHaveLength(7);
    expect(new Set(LEGEND.map((l) => l.shape)).size).toBe(7);
  });
});
