/**
 * Browser entry point: connects to the engine's websocket bridge at /ws,
 * wires the session state machine to the DOM, and renders on every change.
 */

import { parseEvent } from "./protocol.js";
import { render } from "./renderer.js";
import { SessionView } from "./session.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const svg = byId<HTMLElement>("graph") as unknown as SVGSVGElement;
const logPane = byId<HTMLDivElement>("log");
const banner = byId<HTMLDivElement>("banner");
const statusLine = byId<HTMLDivElement>("status");
const buttons = {
  step: byId<HTMLButtonElement>("btn-step"),
  continue: byId<HTMLButtonElement>("btn-continue"),
  abort: byId<HTMLButtonElement>("btn-abort"),
  snapshot: byId<HTMLButtonElement>("btn-snapshot"),
  retry: byId<HTMLButtonElement>("btn-retry"),
};

let socket: WebSocket | null = null;
let view: SessionView | null = null;

function describeEvent(ev: { event: string; rule?: string; result?: boolean; text?: string }): string {
  switch (ev.event) {
    case "sequence_started":
      return `sequence started: ${ev.text ?? ""}`;
    case "graph_snapshot":
      return "graph snapshot";
    case "match_found":
      return `match found: ${ev.rule ?? ""}`;
    case "pre_apply":
      return `about to apply: ${ev.rule ?? ""}`;
    case "post_apply":
      return `applied: ${ev.rule ?? ""}`;
    case "sequence_finished":
      return `sequence finished: ${ev.result ? "success" : "failure"}`;
    default:
      return ev.event;
  }
}

function refresh(v: SessionView): void {
  render(svg, v.viewGraph, v.highlight);
  logPane.innerHTML = "";
  for (const ev of v.events) {
    const line = document.createElement("div");
    line.className = `log-line log-${ev.event}`;
    line.textContent = `#${ev.step} ${describeEvent(ev)}`;
    logPane.appendChild(line);
  }
  logPane.scrollTop = logPane.scrollHeight;
  const enabled = v.canSend();
  buttons.step.disabled = !enabled;
  buttons.continue.disabled = !enabled;
  buttons.abort.disabled = !enabled;
  buttons.snapshot.disabled = !enabled;
  banner.hidden = v.connection === "open" || v.connection === "connecting";
  banner.textContent =
    v.connection === "error"
      ? "Connection failed. Is the engine running with --debug-port?"
      : "Session ended.";
  const suspensions = v.pendingCommand ? "suspended, awaiting command" : "running";
  statusLine.textContent =
    v.connection === "open"
      ? `step ${v.stepIndex} | ${suspensions}` +
        (v.lastResult === null ? "" : ` | result: ${v.lastResult}`)
      : v.connection;
}

function connect(): void {
  const url = `ws://${location.host}/ws`;
  banner.hidden = true;
  socket = new WebSocket(url);
  const session = new SessionView(
    (payload) => socket?.send(payload),
    { onChange: refresh },
  );
  view = session;
  socket.onopen = () => session.opened();
  socket.onmessage = (msg) => {
    try {
      session.handleEvent(parseEvent(String(msg.data)));
    } catch (err) {
      console.error("bad event", msg.data, err);
    }
  };
  socket.onclose = () => session.closed(false);
  socket.onerror = () => session.closed(true);
  refresh(session);
}

for (const verb of ["step", "continue", "abort", "snapshot"] as const) {
  buttons[verb].addEventListener("click", () => {
    if (view?.canSend()) view.send(verb);
  });
}
buttons.retry.addEventListener("click", () => {
  socket?.close();
  connect();
});

connect();
