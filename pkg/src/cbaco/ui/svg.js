// Renders a Scene as standalone SVG markup. Pure string building, so the
// output can be tested without a DOM and dropped into any container.
import { EDGE_STROKE, FALLBACK_COLOR } from "./scene.js";
import { POLYGON_CORNERS } from "./shapes.js";
const XML_ESCAPES = {
    "&": "&amp;",
    "<": "&lt;",
    ">": "&gt;",
    '"': "&quot;",
    "'": "&#39;",
};
export const escapeXml = (s) => s.replace(/[&<>"']/g, (c) => XML_ESCAPES[c]);
const strokeFor = (color) => EDGE_STROKE[color] ?? FALLBACK_COLOR;
const edgeSvg = (e) => {
    const cls = e.highlighted ? "edge hl" : "edge";
    const dash = e.aux ? ' stroke-dasharray="6 4"' : "";
    const marker = e.arrow ? ` marker-end="url(#arrow-${escapeXml(e.color)})"` : "";
    return (`<line class="${cls}" data-edge="${e.id}" x1="${e.x1}" y1="${e.y1}" ` +
        `x2="${e.x2}" y2="${e.y2}" stroke="${strokeFor(e.color)}"${dash}${marker}>` +
        `<title>${escapeXml(e.type)}</title></line>`);
};
const glyph = (n) => {
    if (n.shape === "Circle") {
        return `<circle cx="${n.x}" cy="${n.y}" r="${n.r}" fill="${n.fill}"/>`;
    }
    if (n.shape === "Ring") {
        return (`<circle cx="${n.x}" cy="${n.y}" r="${n.r - 4}" fill="none" ` +
            `stroke="${n.fill}" stroke-width="8"/>`);
    }
    const points = POLYGON_CORNERS[n.shape];
    if (!points)
        return `<circle cx="${n.x}" cy="${n.y}" r="${n.r}" fill="${n.fill}"/>`;
    return `<polygon points="${points(n.x, n.y, n.r)}" fill="${n.fill}"/>`;
};
const portSvg = (n) => n.ports
    .map((p) => {
    const dot = `<circle class="port" cx="${p.x}" cy="${p.y}" r="3"/>`;
    if (p.name === "Main")
        return dot;
    // In/Out carry direction, so they get a tiny label; Main stays a dot.
    const dx = p.name === "In" ? -6 : 6;
    const anchor = p.name === "In" ? "end" : "start";
    return (dot +
        `<text class="port-label" x="${p.x + dx}" y="${p.y + 3}" ` +
        `text-anchor="${anchor}">${p.name}</text>`);
})
    .join("");
const nodeSvg = (n) => {
    const cls = n.highlighted ? "node hl" : "node";
    const halo = n.highlighted
        ? `<circle class="halo" cx="${n.x}" cy="${n.y}" r="${n.r + 8}"/>`
        : "";
    return (`<g class="${cls}" data-node="${n.id}" data-type="${n.type}">` +
        halo +
        glyph(n) +
        portSvg(n) +
        `<text class="node-label" x="${n.x}" y="${n.y + n.r + 18}" ` +
        `text-anchor="middle">${escapeXml(n.label)}</text>` +
        `</g>`);
};
const arrowDefs = (scene) => {
    const colors = new Set();
    for (const item of scene.items) {
        if (item.kind === "edge" && item.arrow)
            colors.add(item.color);
    }
    return Array.from(colors)
        .sort()
        .map((c) => `<marker id="arrow-${escapeXml(c)}" viewBox="0 0 10 10" refX="9" refY="5" ` +
        `markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
        `<path d="M 0 0 L 10 5 L 0 10 z" fill="${strokeFor(c)}"/></marker>`)
        .join("");
};
export const sceneToSvg = (scene) => {
    const body = scene.items
        .map((item) => (item.kind === "edge" ? edgeSvg(item) : nodeSvg(item)))
        .join("\n");
    return (`<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${scene.width} ${scene.height}" ` +
        `width="${scene.width}" height="${scene.height}" role="img">` +
        `<defs>${arrowDefs(scene)}</defs>\n${body}\n</svg>`);
};
