/**
 * The ViewGraph: what the renderer draws. Built from a graph snapshot plus
 * styling hints, patched incrementally by post_apply deltas, annotated
 * from match_found bindings.
 *
 * Styling hints map 1:1 by exact type name (the wire protocol carries no
 * type hierarchy). Containment pairs (containerType, edgeType) turn
 * matching edges into a parent relation; assignments that would break the
 * forest shape are skipped.
 */

import type {
  AttrMap,
  Binding,
  Delta,
  GraphSnapshot,
  StyleHints,
} from "./protocol.js";
import { emptyHints } from "./protocol.js";

export interface ViewNode {
  id: number;
  type: string;
  attrs: AttrMap;
  color?: string;
  shape?: string;
  label: string;
  labelVisible: boolean;
  parent?: number;
}

export interface ViewEdge {
  id: number;
  type: string;
  attrs: AttrMap;
  src: number;
  trg: number;
  color?: string;
  style?: string;
  label: string;
  labelVisible: boolean;
  isContainment: boolean;
}

export interface HighlightState {
  /** element id -> pattern element names annotating it */
  annotations: Map<number, string[]>;
  /** bindings whose element no longer exists in the view */
  missing: Binding[];
}

export class ViewGraph {
  nodes = new Map<number, ViewNode>();
  edges = new Map<number, ViewEdge>();
  hints: StyleHints = emptyHints();
}

function styledLabel(
  table: Record<string, string>,
  type: string,
  id: number,
  attrs: AttrMap,
): { label: string; visible: boolean } {
  const hint = table[type];
  if (hint === "") {
    return { label: "", visible: false };
  }
  if (hint !== undefined) {
    const value = attrs[hint];
    return { label: value === undefined ? "" : String(value), visible: true };
  }
  return { label: `${type}#${id}`, visible: true };
}

function makeNode(
  id: number,
  type: string,
  attrs: AttrMap,
  hints: StyleHints,
): ViewNode {
  const { label, visible } = styledLabel(hints.node_label, type, id, attrs);
  return {
    id,
    type,
    attrs,
    color: hints.node_color[type],
    shape: hints.node_shape[type],
    label,
    labelVisible: visible,
  };
}

function makeEdge(
  id: number,
  type: string,
  src: number,
  trg: number,
  attrs: AttrMap,
  hints: StyleHints,
): ViewEdge {
  const { label, visible } = styledLabel(hints.edge_label, type, id, attrs);
  return {
    id,
    type,
    attrs,
    src,
    trg,
    color: hints.edge_color[type],
    style: hints.edge_style[type],
    label,
    labelVisible: visible,
    isContainment: hints.containment.some(([, edgeType]) => edgeType === type),
  };
}

export function buildViewGraph(
  snapshot: GraphSnapshot,
  hints: StyleHints,
): ViewGraph {
  const vg = new ViewGraph();
  vg.hints = hints;
  for (const n of snapshot.nodes) {
    vg.nodes.set(n.id, makeNode(n.id, n.type, n.attrs, hints));
  }
  for (const e of snapshot.edges) {
    vg.edges.set(e.id, makeEdge(e.id, e.type, e.src, e.trg, e.attrs, hints));
  }
  recomputeContainment(vg);
  return vg;
}

/** Assign containment parents; first registration wins, cycles are skipped. */
export function recomputeContainment(vg: ViewGraph): void {
  for (const node of vg.nodes.values()) {
    node.parent = undefined;
  }
  const wouldCycle = (child: number, parent: number): boolean => {
    let cursor: number | undefined = parent;
    while (cursor !== undefined) {
      if (cursor === child) return true;
      cursor = vg.nodes.get(cursor)?.parent;
    }
    return false;
  };
  for (const [containerType, edgeType] of vg.hints.containment) {
    for (const edge of vg.edges.values()) {
      if (edge.type !== edgeType) continue;
      const container = vg.nodes.get(edge.src);
      const child = vg.nodes.get(edge.trg);
      if (!container || !child || container.type !== containerType) continue;
      if (child.parent !== undefined || edge.src === edge.trg) continue;
      if (wouldCycle(edge.trg, edge.src)) continue;
      child.parent = edge.src;
    }
  }
}

/** Patch the view with a post_apply delta: adds, deletes, retypes. */
export function applyDelta(vg: ViewGraph, delta: Delta): void {
  for (const rec of delta.created) {
    if (rec.src !== undefined && rec.trg !== undefined) {
      vg.edges.set(
        rec.id,
        makeEdge(rec.id, rec.type, rec.src, rec.trg, rec.attrs, vg.hints),
      );
    } else {
      vg.nodes.set(rec.id, makeNode(rec.id, rec.type, rec.attrs, vg.hints));
    }
  }
  for (const [id, type] of delta.retyped) {
    const node = vg.nodes.get(id);
    if (node) {
      vg.nodes.set(id, makeNode(id, type, node.attrs, vg.hints));
    }
    const edge = vg.edges.get(id);
    if (edge) {
      vg.edges.set(
        id,
        makeEdge(id, type, edge.src, edge.trg, edge.attrs, vg.hints),
      );
    }
  }
  for (const id of delta.deleted) {
    vg.nodes.delete(id);
    vg.edges.delete(id);
  }
  // Deleting a node can orphan edges if a delta ever under-reports; keep the
  // view self-consistent rather than crash.
  for (const [id, edge] of [...vg.edges]) {
    if (!vg.nodes.has(edge.src) || !vg.nodes.has(edge.trg)) {
      vg.edges.delete(id);
    }
  }
  recomputeContainment(vg);
}

/**
 * Compute highlight annotations for a match_found event. Bound elements get
 * their pattern element names; bindings to vanished elements are reported
 * as missing ("deleted" markers) instead of crashing the view.
 */
export function applyHighlight(
  vg: ViewGraph,
  bindings: Binding[],
): HighlightState {
  const annotations = new Map<number, string[]>();
  const missing: Binding[] = [];
  for (const [name, id] of bindings) {
    if (vg.nodes.has(id) || vg.edges.has(id)) {
      const existing = annotations.get(id) ?? [];
      existing.push(name);
      annotations.set(id, existing);
    } else {
      missing.push([name, id]);
    }
  }
  return { annotations, missing };
}
