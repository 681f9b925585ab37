// Glyph geometry. Polygons are corner lists around a centre; circles and
// rings render as <circle> elements and need no points.

import type { Shape } from "./types.js";

export type PortName = "Main" | "In" | "Out";

const round = (v: number): number => Math.round(v * 100) / 100;

const corners = (cx: number, cy: number, r: number, n: number, tilt: number): string =>
  Array.from({ length: n }, (_, k) => {
    const a = tilt + (2 * Math.PI * k) / n;
    return `${round(cx + r * Math.cos(a))},${round(cy + r * Math.sin(a))}`;
  }).join(" ");

type Corners = (cx: number, cy: number, r: number) => string;

export const POLYGON_CORNERS: Partial<Record<Shape, Corners>> = {
  Pentagon: (cx, cy, r) => corners(cx, cy, r, 5, -Math.PI / 2),
  Triangle: (cx, cy, r) => corners(cx, cy, r, 3, -Math.PI / 2),
  Square: (cx, cy, r) => corners(cx, cy, r, 4, Math.PI / 4),
  Diamond: (cx, cy, r) => corners(cx, cy, r, 4, -Math.PI / 2),
  Hexagon: (cx, cy, r) => corners(cx, cy, r, 6, 0),
};

// Ports sit just outside the glyph: Main below, In on the left, Out on the
// right, matching the directions edges flow through them.
const PORT_ANGLES: Record<PortName, number> = {
  Main: Math.PI / 2,
  In: Math.PI,
  Out: 0,
};

export const portAnchor = (
  cx: number,
  cy: number,
  r: number,
  port: PortName,
): { x: number; y: number } => ({
  x: round(cx + (r + 5) * Math.cos(PORT_ANGLES[port])),
  y: round(cy + (r + 5) * Math.sin(PORT_ANGLES[port])),
});

export const isPortName = (name: string): name is PortName =>
  name === "Main" || name === "In" || name === "Out";
