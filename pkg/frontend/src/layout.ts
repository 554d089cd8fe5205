/**
 * Node positioning. Three layouts, all deterministic: circular (ascending
 * id around a circle), hierarchic (BFS layers left to right), and organic
 * (seeded force simulation with a fixed iteration count). Containment
 * children are pulled toward their parent so nesting reads visually.
 */

import type { ViewGraph } from "./viewgraph.js";

export interface Point {
  x: number;
  y: number;
}

export type LayoutName = "hierarchic" | "organic" | "circular";

const WIDTH = 900;
const HEIGHT = 600;

export function layout(vg: ViewGraph, name: string): Map<number, Point> {
  if (name === "circular") return circular(vg);
  if (name === "hierarchic") return hierarchic(vg);
  return organic(vg);
}

export function circular(vg: ViewGraph): Map<number, Point> {
  const ids = [...vg.nodes.keys()].sort((a, b) => a - b);
  const points = new Map<number, Point>();
  const radius = Math.min(WIDTH, HEIGHT) / 2 - 60;
  ids.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(ids.length, 1) - Math.PI / 2;
    points.set(id, {
      x: WIDTH / 2 + radius * Math.cos(angle),
      y: HEIGHT / 2 + radius * Math.sin(angle),
    });
  });
  return points;
}

export function hierarchic(vg: ViewGraph): Map<number, Point> {
  const ids = [...vg.nodes.keys()].sort((a, b) => a - b);
  const incoming = new Map<number, number>();
  for (const id of ids) incoming.set(id, 0);
  for (const edge of vg.edges.values()) {
    if (edge.src !== edge.trg) {
      incoming.set(edge.trg, (incoming.get(edge.trg) ?? 0) + 1);
    }
  }
  const layerOf = new Map<number, number>();
  let frontier = ids.filter((id) => incoming.get(id) === 0);
  if (frontier.length === 0 && ids.length > 0) {
    frontier = [ids[0]]; // all nodes sit on cycles; seed with the lowest id
  }
  let depth = 0;
  while (frontier.length > 0) {
    const next: number[] = [];
    for (const id of frontier) {
      if (layerOf.has(id)) continue;
      layerOf.set(id, depth);
      for (const edge of vg.edges.values()) {
        if (edge.src === id && !layerOf.has(edge.trg)) next.push(edge.trg);
      }
    }
    frontier = next.sort((a, b) => a - b);
    depth += 1;
  }
  for (const id of ids) {
    if (!layerOf.has(id)) layerOf.set(id, depth); // unreachable leftovers
  }
  const layers = new Map<number, number[]>();
  for (const id of ids) {
    const layer = layerOf.get(id)!;
    const bucket = layers.get(layer) ?? [];
    bucket.push(id);
    layers.set(layer, bucket);
  }
  const points = new Map<number, Point>();
  const layerCount = Math.max(...layers.keys()) + 1;
  for (const [layer, bucket] of layers) {
    bucket.sort((a, b) => a - b);
    bucket.forEach((id, i) => {
      points.set(id, {
        x: 80 + ((WIDTH - 160) * layer) / Math.max(layerCount - 1, 1),
        y: 60 + ((HEIGHT - 120) * (i + 0.5)) / bucket.length,
      });
    });
  }
  return points;
}

/** Small deterministic PRNG so organic layouts are reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function organic(vg: ViewGraph, iterations = 150): Map<number, Point> {
  const ids = [...vg.nodes.keys()].sort((a, b) => a - b);
  const points = new Map<number, Point>();
  const rand = mulberry32(42);
  for (const id of ids) {
    points.set(id, {
      x: WIDTH * (0.2 + 0.6 * rand()),
      y: HEIGHT * (0.2 + 0.6 * rand()),
    });
  }
  if (ids.length <= 1) return points;
  const springs: Array<[number, number]> = [];
  for (const edge of vg.edges.values()) {
    if (edge.src !== edge.trg) springs.push([edge.src, edge.trg]);
  }
  for (const node of vg.nodes.values()) {
    if (node.parent !== undefined) springs.push([node.id, node.parent]);
  }
  const k = Math.sqrt((WIDTH * HEIGHT) / ids.length) * 0.6;
  for (let round = 0; round < iterations; round++) {
    const disp = new Map<number, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = points.get(ids[i])!;
        const b = points.get(ids[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        const dist = Math.max(Math.hypot(dx, dy), 0.01);
        const force = (k * k) / dist / dist;
        dx *= force;
        dy *= force;
        const da = disp.get(ids[i])!;
        const db = disp.get(ids[j])!;
        da.x += dx;
        da.y += dy;
        db.x -= dx;
        db.y -= dy;
      }
    }
    for (const [srcId, trgId] of springs) {
      const a = points.get(srcId)!;
      const b = points.get(trgId)!;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(Math.hypot(dx, dy), 0.01);
      const force = (dist * dist) / k / dist;
      const da = disp.get(srcId)!;
      const db = disp.get(trgId)!;
      da.x += dx * force * 0.05;
      da.y += dy * force * 0.05;
      db.x -= dx * force * 0.05;
      db.y -= dy * force * 0.05;
    }
    const temperature = 12 * (1 - round / iterations) + 1;
    for (const id of ids) {
      const p = points.get(id)!;
      const d = disp.get(id)!;
      const len = Math.max(Math.hypot(d.x, d.y), 0.01);
      p.x += (d.x / len) * Math.min(len, temperature);
      p.y += (d.y / len) * Math.min(len, temperature);
      p.x = Math.min(WIDTH - 40, Math.max(40, p.x));
      p.y = Math.min(HEIGHT - 40, Math.max(40, p.y));
    }
  }
  return points;
}
