/**
 * Wire types for the engine's debug protocol: JSON objects, one per
 * websocket message (or one per line on the raw TCP transport).
 */

export interface AttrMap {
  [name: string]: string | number | boolean;
}

export interface SnapshotNode {
  id: number;
  type: string;
  attrs: AttrMap;
}

export interface SnapshotEdge {
  id: number;
  type: string;
  src: number;
  trg: number;
  attrs: AttrMap;
}

export interface GraphSnapshot {
  nodes: SnapshotNode[];
  edges: SnapshotEdge[];
}

export interface StyleHints {
  node_color: Record<string, string>;
  node_shape: Record<string, string>;
  node_label: Record<string, string>;
  edge_color: Record<string, string>;
  edge_style: Record<string, string>;
  edge_label: Record<string, string>;
  containment: [string, string][]; // [container node type, edge type]
  layout: string;
}

export interface DeltaRecord {
  id: number;
  type: string;
  attrs: AttrMap;
  src?: number;
  trg?: number;
}

export interface Delta {
  created: DeltaRecord[];
  deleted: number[];
  retyped: [number, string][];
}

export type Binding = [string, number];

export interface DebugEvent {
  event:
    | "sequence_started"
    | "graph_snapshot"
    | "match_found"
    | "pre_apply"
    | "post_apply"
    | "sequence_finished";
  step: number;
  suspended?: boolean;
  text?: string;
  rule?: string;
  bindings?: Binding[];
  graph?: GraphSnapshot;
  hints?: StyleHints;
  delta?: Delta;
  result?: boolean;
}

export type CommandVerb = "step" | "continue" | "abort" | "snapshot";

export function encodeCommand(verb: CommandVerb): string {
  return JSON.stringify({ command: verb });
}

export function parseEvent(raw: string): DebugEvent {
  const obj = JSON.parse(raw);
  if (typeof obj.event !== "string" || typeof obj.step !== "number") {
    throw new Error(`not a debug event: ${raw}`);
  }
  return obj as DebugEvent;
}

/** Splits a byte/char stream into newline-delimited JSON events. */
export class LineDecoder {
  private buffer = "";

  push(chunk: string): DebugEvent[] {
    this.buffer += chunk;
    const events: DebugEvent[] = [];
    let idx;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line.length > 0) {
        events.push(parseEvent(line));
      }
    }
    return events;
  }
}

export function emptyHints(): StyleHints {
  return {
    node_color: {},
    node_shape: {},
    node_label: {},
    edge_color: {},
    edge_style: {},
    edge_label: {},
    containment: [],
    layout: "organic",
  };
}
