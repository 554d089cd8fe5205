import assert from "node:assert/strict";
import { test } from "node:test";

import type { DebugEvent } from "../src/protocol.js";
import { SessionView } from "../src/session.js";

function makeSession() {
  const sent: string[] = [];
  const session = new SessionView((payload) => sent.push(payload));
  session.opened();
  return { session, sent };
}

const SNAPSHOT: DebugEvent = {
  event: "graph_snapshot",
  step: 1,
  graph: {
    nodes: [{ id: 7, type: "T", attrs: {} }],
    edges: [],
  },
  hints: {
    node_color: {},
    node_shape: {},
    node_label: {},
    edge_color: {},
    edge_style: {},
    edge_label: {},
    containment: [],
    layout: "organic",
  },
};

test("controls stay disabled until a suspension is pending", () => {
  const { session } = makeSession();
  assert.equal(session.canSend(), false);
  session.handleEvent({ event: "sequence_started", step: 0, text: "r" });
  assert.equal(session.canSend(), false);
  session.handleEvent(SNAPSHOT);
  session.handleEvent({
    event: "match_found",
    step: 2,
    rule: "r",
    bindings: [["n", 7]],
    suspended: true,
  });
  assert.equal(session.canSend(), true);
});

test("sending locks until the next event arrives", () => {
  const { session, sent } = makeSession();
  session.handleEvent(SNAPSHOT);
  session.handleEvent({
    event: "match_found",
    step: 2,
    rule: "r",
    bindings: [],
    suspended: true,
  });
  session.send("step");
  assert.deepEqual(sent, ['{"command":"step"}']);
  assert.equal(session.canSend(), false);
  assert.throws(() => session.send("step"));
  session.handleEvent({ event: "pre_apply", step: 3, rule: "r", suspended: true });
  assert.equal(session.canSend(), true);
});

test("snapshot command keeps the suspension pending", () => {
  const { session } = makeSession();
  session.handleEvent(SNAPSHOT);
  session.handleEvent({
    event: "match_found",
    step: 2,
    rule: "r",
    bindings: [],
    suspended: true,
  });
  session.send("snapshot");
  // engine answers with a snapshot still flagged suspended
  session.handleEvent({ ...SNAPSHOT, step: 3, suspended: true });
  assert.equal(session.canSend(), true);
});

test("event log is append-only and step indices track events", () => {
  const { session } = makeSession();
  const events: DebugEvent[] = [
    { event: "sequence_started", step: 0, text: "x" },
    SNAPSHOT,
    { event: "match_found", step: 2, rule: "r", bindings: [["n", 7]], suspended: true },
  ];
  for (const ev of events) {
    const before = session.events.length;
    session.handleEvent(ev);
    assert.equal(session.events.length, before + 1);
  }
  assert.equal(session.stepIndex, 2);
  assert.deepEqual(
    session.events.map((e) => e.event),
    ["sequence_started", "graph_snapshot", "match_found"],
  );
});

test("match_found sets highlights, post_apply clears them", () => {
  const { session } = makeSession();
  session.handleEvent(SNAPSHOT);
  session.handleEvent({
    event: "match_found",
    step: 2,
    rule: "r",
    bindings: [["n", 7]],
    suspended: false,
  });
  assert.deepEqual(session.highlight.annotations.get(7), ["n"]);
  session.handleEvent({
    event: "post_apply",
    step: 3,
    rule: "r",
    delta: { created: [], deleted: [], retyped: [] },
  });
  assert.equal(session.highlight.annotations.size, 0);
});

test("closed transport kills the session and disables controls", () => {
  const { session } = makeSession();
  session.handleEvent(SNAPSHOT);
  session.handleEvent({
    event: "match_found",
    step: 2,
    rule: "r",
    bindings: [],
    suspended: true,
  });
  session.closed(true);
  assert.equal(session.connection, "error");
  assert.equal(session.canSend(), false);
});

test("sequence_finished records the result", () => {
  const { session } = makeSession();
  session.handleEvent({ event: "sequence_finished", step: 9, result: false });
  assert.equal(session.lastResult, false);
});
