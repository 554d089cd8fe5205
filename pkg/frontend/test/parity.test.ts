/**
 * Acceptance checks against the live engine: highlight fidelity for the
 * looping-edge fixture, and step/continue/abort round-trips whose event
 * logs must match the engine's own headless scripted client.
 */

import assert from "node:assert/strict";
import { join } from "node:path";
import { test } from "node:test";

import { applyHighlight } from "../src/viewgraph.js";
import { CORPUS, headlessReferenceLog, runWithSession } from "./harness.js";

const COUNT = join(CORPUS, "Count.grs");
const HELLO = join(CORPUS, "HelloWorld.grs");

test("looping-edge highlight equals the match_found binding set", async () => {
  const run = await runWithSession(COUNT, "continue");
  assert.equal(run.status, 0);
  const looping = run.events.filter(
    (e) => e.event === "match_found" && e.rule === "countLoopingEdge",
  );
  assert.equal(looping.length, 1, "exactly one looping-edge match");
  const bindings = looping[0].bindings ?? [];
  assert.deepEqual(
    [...new Set(bindings.map(([name]) => name))].sort(),
    ["e", "n"],
  );
  // Rebuild the highlight exactly as the renderer would at that moment:
  // the session's final ViewGraph still contains the matched elements
  // (counting rules only touch the result node), so annotate against it.
  const highlight = applyHighlight(run.session.viewGraph, bindings);
  assert.equal(highlight.missing.length, 0);
  const annotated = new Set<string>();
  for (const [id, names] of highlight.annotations) {
    for (const name of names) annotated.add(`${name}:${id}`);
  }
  const expected = new Set(bindings.map(([name, id]) => `${name}:${id}`));
  assert.deepEqual(annotated, expected);
});

test("continue round-trip matches the headless client log", async () => {
  const [run, reference] = await Promise.all([
    runWithSession(COUNT, "continue"),
    headlessReferenceLog(COUNT, "continue"),
  ]);
  assert.equal(run.status, 0);
  assert.deepEqual(run.events, reference);
});

test("step round-trip matches the headless client log", async () => {
  const [run, reference] = await Promise.all([
    runWithSession(HELLO, "step"),
    headlessReferenceLog(HELLO, "step"),
  ]);
  assert.equal(run.status, 0);
  assert.deepEqual(run.events, reference);
});

test("abort round-trip matches the headless client log", async () => {
  const [run, reference] = await Promise.all([
    runWithSession(HELLO, "abort"),
    headlessReferenceLog(HELLO, "abort"),
  ]);
  assert.equal(run.status, 1); // aborted sequence fails the script
  assert.deepEqual(run.events, reference);
  const finished = run.events.filter((e) => e.event === "sequence_finished");
  assert.equal(finished[0]?.result, false);
  assert.equal(run.events.some((e) => e.event === "post_apply"), false);
});

test("session view sees a graph before the first match", async () => {
  const run = await runWithSession(HELLO, "continue");
  const kinds = run.events.map((e) => e.event);
  const snapshotAt = kinds.indexOf("graph_snapshot");
  const matchAt = kinds.indexOf("match_found");
  assert.ok(snapshotAt >= 0 && matchAt > snapshotAt);
});
