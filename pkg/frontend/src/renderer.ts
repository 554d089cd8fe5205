/**
 * SVG renderer. Draws containment hulls behind everything, then edges with
 * arrowheads, then nodes with their labels. Highlighted elements get a
 * halo and a badge listing their pattern element names; everything else is
 * dimmed while a match is shown.
 */

import { layout, Point } from "./layout.js";
import type { HighlightState, ViewEdge, ViewGraph, ViewNode } from "./viewgraph.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_R = 16;

function el<K extends string>(tag: K, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function text(content: string, attrs: Record<string, string>): SVGElement {
  const node = el("text", attrs);
  node.textContent = content;
  return node;
}

export function render(
  svg: SVGSVGElement,
  vg: ViewGraph,
  highlight: HighlightState,
): void {
  svg.innerHTML =
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" ' +
    'markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
    '<path d="M 0 0 L 10 5 L 0 10 z" fill="#8a8f98"/></marker></defs>';
  const points = layout(vg, vg.hints.layout);
  const dimming = highlight.annotations.size > 0;

  renderContainmentHulls(svg, vg, points);
  for (const edge of vg.edges.values()) {
    renderEdge(svg, edge, points, highlight, dimming);
  }
  for (const node of vg.nodes.values()) {
    renderNode(svg, node, points.get(node.id)!, highlight, dimming);
  }
}

function renderContainmentHulls(
  svg: SVGSVGElement,
  vg: ViewGraph,
  points: Map<number, Point>,
): void {
  const children = new Map<number, ViewNode[]>();
  for (const node of vg.nodes.values()) {
    if (node.parent !== undefined) {
      const bucket = children.get(node.parent) ?? [];
      bucket.push(node);
      children.set(node.parent, bucket);
    }
  }
  for (const [parent, kids] of children) {
    const involved = [parent, ...kids.map((k) => k.id)]
      .map((id) => points.get(id))
      .filter((p): p is Point => p !== undefined);
    const xs = involved.map((p) => p.x);
    const ys = involved.map((p) => p.y);
    const pad = 34;
    svg.appendChild(
      el("rect", {
        x: String(Math.min(...xs) - pad),
        y: String(Math.min(...ys) - pad),
        width: String(Math.max(...xs) - Math.min(...xs) + 2 * pad),
        height: String(Math.max(...ys) - Math.min(...ys) + 2 * pad),
        rx: "12",
        class: "hull",
      }),
    );
  }
}

function elementClass(
  id: number,
  highlight: HighlightState,
  dimming: boolean,
  base: string,
): string {
  if (highlight.annotations.has(id)) return `${base} highlighted`;
  return dimming ? `${base} dimmed` : base;
}

function renderEdge(
  svg: SVGSVGElement,
  edge: ViewEdge,
  points: Map<number, Point>,
  highlight: HighlightState,
  dimming: boolean,
): void {
  const a = points.get(edge.src);
  const b = points.get(edge.trg);
  if (!a || !b) return;
  const cls = elementClass(edge.id, highlight, dimming, "edge");
  const color = edge.color ?? "#8a8f98";
  let labelPos: Point;
  if (edge.src === edge.trg) {
    const path = el("path", {
      d: `M ${a.x + 8} ${a.y - 12} C ${a.x + 46} ${a.y - 46}, ` +
        `${a.x + 46} ${a.y + 22}, ${a.x + 12} ${a.y + 10}`,
      class: cls,
      stroke: color,
      fill: "none",
      "marker-end": "url(#arrow)",
    });
    if (edge.style === "dashed") path.setAttribute("stroke-dasharray", "5 3");
    svg.appendChild(path);
    labelPos = { x: a.x + 50, y: a.y - 18 };
  } else {
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const len = Math.max(Math.hypot(dx, dy), 0.01);
    const sx = a.x + (dx / len) * NODE_R;
    const sy = a.y + (dy / len) * NODE_R;
    const ex = b.x - (dx / len) * (NODE_R + 4);
    const ey = b.y - (dy / len) * (NODE_R + 4);
    const line = el("line", {
      x1: String(sx),
      y1: String(sy),
      x2: String(ex),
      y2: String(ey),
      class: cls,
      stroke: color,
      "marker-end": "url(#arrow)",
    });
    if (edge.style === "dashed") line.setAttribute("stroke-dasharray", "5 3");
    svg.appendChild(line);
    labelPos = { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 - 6 };
  }
  if (edge.labelVisible && edge.label) {
    svg.appendChild(
      text(edge.label, {
        x: String(labelPos.x),
        y: String(labelPos.y),
        class: `edge-label ${cls}`,
      }),
    );
  }
  const names = highlight.annotations.get(edge.id);
  if (names) {
    svg.appendChild(
      text(names.join(", "), {
        x: String(labelPos.x),
        y: String(labelPos.y - 14),
        class: "annotation",
      }),
    );
  }
}

function renderNode(
  svg: SVGSVGElement,
  node: ViewNode,
  p: Point,
  highlight: HighlightState,
  dimming: boolean,
): void {
  const cls = elementClass(node.id, highlight, dimming, "node");
  const fill = node.color ?? "#4f7acc";
  if (highlight.annotations.has(node.id)) {
    svg.appendChild(
      el("circle", {
        cx: String(p.x),
        cy: String(p.y),
        r: String(NODE_R + 6),
        class: "halo",
      }),
    );
  }
  if (node.shape === "box") {
    svg.appendChild(
      el("rect", {
        x: String(p.x - NODE_R),
        y: String(p.y - NODE_R * 0.75),
        width: String(NODE_R * 2),
        height: String(NODE_R * 1.5),
        rx: "3",
        class: cls,
        fill,
      }),
    );
  } else {
    svg.appendChild(
      el("circle", {
        cx: String(p.x),
        cy: String(p.y),
        r: String(NODE_R),
        class: cls,
        fill,
      }),
    );
  }
  if (node.labelVisible && node.label) {
    svg.appendChild(
      text(node.label, {
        x: String(p.x),
        y: String(p.y + NODE_R + 14),
        class: `node-label ${cls}`,
      }),
    );
  }
  const names = highlight.annotations.get(node.id);
  if (names) {
    svg.appendChild(
      text(names.join(", "), {
        x: String(p.x),
        y: String(p.y - NODE_R - 8),
        class: "annotation",
      }),
    );
  }
}
