/**
 * Session state machine. Transport-agnostic: the browser feeds it websocket
 * messages, the parity tests feed it raw socket lines. It owns the event
 * log (append-only), the current ViewGraph, highlights, and the command
 * gate: commands can be sent only while a suspension is pending and none
 * is already in flight.
 */

import type { Binding, CommandVerb, DebugEvent, StyleHints } from "./protocol.js";
import { emptyHints } from "./protocol.js";
import {
  applyDelta,
  applyHighlight,
  buildViewGraph,
  HighlightState,
  ViewGraph,
} from "./viewgraph.js";

export type ConnectionState = "connecting" | "open" | "closed" | "error";

export interface SessionListener {
  onChange?(view: SessionView): void;
}

export class SessionView {
  readonly events: DebugEvent[] = [];
  stepIndex = -1;
  connection: ConnectionState = "connecting";
  /** true while the engine awaits a command */
  pendingCommand = false;
  /** true between send() and the next event */
  commandInFlight = false;
  sequenceText = "";
  lastResult: boolean | null = null;
  viewGraph: ViewGraph = new ViewGraph();
  hints: StyleHints = emptyHints();
  highlight: HighlightState = { annotations: new Map(), missing: [] };

  constructor(
    private readonly transportSend: (payload: string) => void,
    private readonly listener: SessionListener = {},
  ) {}

  opened(): void {
    this.connection = "open";
    this.notify();
  }

  closed(error = false): void {
    this.connection = error ? "error" : "closed";
    this.pendingCommand = false;
    this.commandInFlight = false;
    this.notify();
  }

  canSend(): boolean {
    return (
      this.connection === "open" && this.pendingCommand && !this.commandInFlight
    );
  }

  send(verb: CommandVerb): void {
    if (!this.canSend()) {
      throw new Error(`cannot send ${verb}: no suspension pending`);
    }
    this.commandInFlight = true;
    if (verb !== "snapshot") {
      this.pendingCommand = false;
    }
    this.transportSend(JSON.stringify({ command: verb }));
    this.notify();
  }

  handleEvent(event: DebugEvent): void {
    this.events.push(event);
    this.stepIndex = event.step;
    this.commandInFlight = false;
    this.pendingCommand = event.suspended === true;
    switch (event.event) {
      case "sequence_started":
        this.sequenceText = event.text ?? "";
        this.lastResult = null;
        this.highlight = { annotations: new Map(), missing: [] };
        break;
      case "graph_snapshot":
        this.hints = event.hints ?? emptyHints();
        this.viewGraph = buildViewGraph(
          event.graph ?? { nodes: [], edges: [] },
          this.hints,
        );
        break;
      case "match_found":
        this.highlight = applyHighlight(
          this.viewGraph,
          (event.bindings ?? []) as Binding[],
        );
        break;
      case "post_apply":
        if (event.delta) {
          applyDelta(this.viewGraph, event.delta);
        }
        this.highlight = { annotations: new Map(), missing: [] };
        break;
      case "sequence_finished":
        this.lastResult = event.result ?? null;
        this.highlight = { annotations: new Map(), missing: [] };
        break;
    }
    this.notify();
  }

  private notify(): void {
    this.listener.onChange?.(this);
  }
}
