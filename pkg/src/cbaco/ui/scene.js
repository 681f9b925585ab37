// Turns a graph payload into a deterministic drawing plan. The server owns
// every semantic choice — shapes, colours, which edges exist — so this module
// only decides where things go on the canvas. Same payload, same scene.
import { isPortName, portAnchor } from "./shapes.js";
export const NODE_RADIUS = 22;
const COL_GAP = 190;
const ROW_GAP = 96;
const MARGIN_X = 110;
const MARGIN_Y = 70;
// Left-to-right bands: who, their categories, what they may or must do,
// on what, and the event machinery that drives duties.
const COLUMNS = [["P"], ["C"], ["Pr", "O", "D"], ["A", "R"], ["E", "G"]];
export const NODE_FILL = {
    green: "#7cb66f",
    yellow: "#e9c55c",
    blue: "#6f91d8",
    "light-blue": "#9cd3e8",
};
export const EDGE_STROKE = {
    gray: "#8d939c",
    green: "#2f7a38",
    red: "#c43d3d",
};
export const FALLBACK_COLOR = "#c4c4c4";
export const SHAPES = [
    "Pentagon",
    "Triangle",
    "Hexagon",
    "Square",
    "Diamond",
    "Circle",
    "Ring",
];
export const LEGEND = [
    { shape: "Pentagon", types: "P", meaning: "principal" },
    { shape: "Triangle", types: "C", meaning: "category" },
    { shape: "Hexagon", types: "Pr / O / D", meaning: "permission, obligation, duty" },
    { shape: "Square", types: "A", meaning: "action" },
    { shape: "Diamond", types: "R", meaning: "resource" },
    { shape: "Circle", types: "E", meaning: "event" },
    { shape: "Ring", types: "G", meaning: "event scheme" },
];
const columnOf = (t) => {
    for (let i = 0; i < COLUMNS.length; i += 1) {
        if (COLUMNS[i].includes(t))
            return i;
    }
    return COLUMNS.length - 1;
};
export const shapeCensus = (nodes) => {
    const out = Object.fromEntries(SHAPES.map((s) => [s, 0]));
    for (const n of nodes)
        out[n.shape] += 1;
    return out;
};
const byPlacement = (a, b) => columnOf(a.type) - columnOf(b.type) ||
    (a.type < b.type ? -1 : a.type > b.type ? 1 : 0) ||
    a.id - b.id;
const portsOf = (node, x, y) => {
    const names = node.ports === 3 ? ["Main", "In", "Out"] : ["Main"];
    return names.map((name) => ({ name, ...portAnchor(x, y, NODE_RADIUS, name) }));
};
const edgeItem = (edge, placed, highlighted) => {
    const from = placed.get(edge.from.node);
    const to = placed.get(edge.to.node);
    if (!from || !to)
        return null;
    const anchor = (node, port) => portAnchor(node.x, node.y, node.r, isPortName(port) ? port : "Main");
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
export const computeScene = (doc, opts = {}) => {
    const hidden = new Set(opts.hide ?? []);
    const hlNodes = new Set(opts.highlightNodes ?? []);
    const hlEdges = new Set(opts.highlightEdges ?? []);
    const visible = doc.nodes.filter((n) => !hidden.has(n.type)).sort(byPlacement);
    const rows = new Map();
    const placed = new Map();
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
    const items = [];
    for (const edge of doc.edges) {
        const item = edgeItem(edge, placed, hlEdges.has(edge.id));
        if (item)
            items.push(item);
    }
    for (const node of visible)
        items.push(placed.get(node.id));
    return {
        width: MARGIN_X * 2 + (COLUMNS.length - 1) * COL_GAP,
        height: Math.max(MARGIN_Y * 2 + maxRow * ROW_GAP, 260),
        items,
        census: shapeCensus(visible),
    };
};
