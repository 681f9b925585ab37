// Turns a graph payload into a deterministic drawing plan. The server owns
// every semantic choice — shapes, colours, which edges exist — so this module
// only decides where things go on the canvas. Same payload, same scene.

import { isPortName, portAnchor } from "./shapes.js";
import type { GraphDoc, GraphEdge, GraphNode, NodeType, Shape } from "./types.js";

export const NODE_RADIUS = 22;

const COL_GAP = 190;
const ROW_GAP = 96;
const MARGIN_X = 110;
const MARGIN_Y = 70;

// Left-to-right bands: who, their categories, what they may or must do,
// on what, and the event machinery that drives duties.
const COLUMNS: NodeType[][] = [["P"], ["C"], ["Pr", "O", "D"], ["A", "R"], ["E", "G"]];

export const NODE_FILL: Record<string, string> = {
  green: "#7cb66f",
  yellow: "#e9c55c",
  blue: "#6f91d8",
  "light-blue": "#9cd3e8",
};

export const EDGE_STROKE: Record<string, string> = {
  gray: "#8d939c",
  green: "#2f7a38",
  red: "#c43d3d",
};

export const FALLBACK_COLOR = "#c4c4c4";

export const SHAPES: Shape[] = [
  "Pentagon",
  "Triangle",
  "Hexagon",
  "Square",
  "Diamond",
  "Circle",
  "Ring",
];

export const LEGEND: ReadonlyArray<{ shape: Shape; types: string; meaning: string }> = [
  { shape: "Pentagon", types: "P", meaning: "principal" },
  { shape: "Triangle", types: "C", meaning: "category" },
  { shape: "Hexagon", types: "Pr / O / D", meaning: "permission, obligation, duty" },
  { shape: "Square", types: "A", meaning: "action" },
  { shape: "Diamond", types: "R", meaning: "resource" },
  { shape: "Circle", types: "E", meaning: "event" },
  { shape: "Ring", types: "G", meaning: "event scheme" },
];

export interface PortMark {
  name: string;
  x: number;
  y: number;
}

export interface NodeItem {
  kind: "node";
  id: number;
  type: NodeType;
  shape: Shape;
  label: string;
  x: number;
  y: number;
  r: number;
  fill: string;
  ports: PortMark[];
  highlighted: boolean;
}

export interface EdgeItem {
  kind: "edge";
  id: number;
  type: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: string;
  arrow: boolean;
  aux: boolean;
  highlighted: boolean;
}

export type DrawItem = EdgeItem | NodeItem;

export interface SceneOptions {
  hide?: Iterable<NodeType>;
  highlightNodes?: Iterable<number>;
  highlightEdges?: Iterable<number>;
}

export interface Scene {
  width: number;
  height: number;
  items: DrawItem[];
  census: Record<Shape, number>;
}

const columnOf = (t: NodeType): number => {
  for (let i = 0; i < COLUMNS.length; i += 1) {
    if (COLUMNS[i].includes(t)) return i;
  }
  return COLUMNS.length - 1;
};

export const shapeCensus = (nodes: ReadonlyArray<GraphNode>): Record<Shape, number> => {
  const out = Object.fromEntries(SHAPES.map((s) => [s, 0])) as Record<Shape, number>;
  for (const n of nodes) out[n.shape] += 1;
  return out;
};

const byPlacement = (a: GraphNode, b: GraphNode): number =>
  columnOf(a.type) - columnOf(b.type) ||
  (a.type < b.type ? -1 : a.type > b.type ? 1 : 0) ||
  a.id - b.id;

const portsOf = (node: GraphNode, x: number, y: number): PortMark[] => {
  const names: ReadonlyArray<"Main" | "In" | "Out"> =
    node.ports === 3 ? ["Main", "In", "Out"] : ["Main"];
  return names.map((name) => ({ name, ...portAnchor(x, y, NODE_RADIUS, name) }));
};

const edgeItem = (
  edge: GraphEdge,
  placed: Map<number, NodeItem>,
  highlighted: boolean,
): EdgeItem | null => {
  const from = placed.get(edge.from.node);
  const to = placed.get(edge.to.node);
  if (!from || !to) return null;
  const anchor = (node: NodeItem, port: string) =>
    portAnchor(node.x, node.y, node.r, isPortName(port) ? port : "Main");
  const a = anchor(from, edge.from.port);
  const b = anchor(to, edge.to.port);
  return {
    kind: "edge",
    id: edge.id,
    type: edge.type,
    x1: a.x,
    y1: a.y,
    x2: b.x,
    y2: b.y,
    color: edge.color,
    arrow: edge.arrows === "forward",
    aux: edge.aux === true,
    highlighted,
  };
};

export const computeScene = (doc: GraphDoc, opts: SceneOptions = {}): Scene => {
  const hidden = new Set(opts.hide ?? []);
  const hlNodes = new Set(opts.highlightNodes ?? []);
  const hlEdges = new Set(opts.highlightEdges ?? []);

  const visible = doc.nodes.filter((n) => !hidden.has(n.type)).sort(byPlacement);

  const rows = new Map<number, number>();
  const placed = new Map<number, NodeItem>();
  let maxRow = 0;
  for (const node of visible) {
    const col = columnOf(node.type);
    const row = rows.get(col) ?? 0;
    rows.set(col, row + 1);
    maxRow = Math.max(maxRow, row);
    const x = MARGIN_X + col * COL_GAP;
    const y = MARGIN_Y + row * ROW_GAP;
    placed.set(node.id, {
      kind: "node",
      id: node.id,
      type: node.type,
      shape: node.shape,
      label: node.label,
      x,
      y,
      r: NODE_RADIUS,
      fill: NODE_FILL[node.color] ?? FALLBACK_COLOR,
      ports: portsOf(node, x, y),
      highlighted: hlNodes.has(node.id),
    });
  }

  const items: DrawItem[] = [];
  for (const edge of doc.edges) {
    const item = edgeItem(edge, placed, hlEdges.has(edge.id));
    if (item) items.push(item);
  }
  for (const node of visible) items.push(placed.get(node.id) as NodeItem);

  return {
    width: MARGIN_X * 2 + (COLUMNS.length - 1) * COL_GAP,
    height: Math.max(MARGIN_Y * 2 + maxRow * ROW_GAP, 260),
    items,
    census: shapeCensus(visible),
  };
};
