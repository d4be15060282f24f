/**
 * Headless run of the viewer's interaction loop against a live service.
 *
 * Usage: node ui_loop.js <baseUrl> <meshPath> <configJson> <expectedJsonPath>
 *
 * Uses the same ApiClient and selection logic as the page: submit the
 * mesh, wait for candidates, deselect the first candidate of view 0,
 * re-fuse, and compare the returned labels (what the viewer would paint
 * red) against the expected labels computed offline.
 */

import { readFileSync } from "node:fs";

import { ApiClient } from "../api.js";
import { faceColors, SEGMENT_COLOR } from "../color.js";
import {
  changedSelections,
  defaultSelections,
  pollDelayMs,
  toggleCandidate,
} from "../state.js";

const [baseUrl, meshPath, configJson, expectedPath] = process.argv.slice(2);
if (!expectedPath) {
  console.error("usage: ui_loop.js <baseUrl> <meshPath> <configJson> <expectedJsonPath>");
  process.exit(2);
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

async function waitDone(api: ApiClient, id: string) {
  for (let tries = 0; tries < 600; tries++) {
    const summary = await api.getJob(id);
    const delay = pollDelayMs(summary.state);
    if (delay === null) return summary;
    await sleep(delay);
  }
  throw new Error("job did not settle");
}

async function main(): Promise<void> {
  const api = new ApiClient(baseUrl);
  const meshBytes = readFileSync(meshPath);
  const id = await api.submitJob(
    new Blob([meshBytes]),
    "mesh.obj",
    "the upper half",
    JSON.parse(configJson),
  );
  console.log(`submitted job ${id}`);

  let summary = await waitDone(api, id);
  if (summary.state !== "done") {
    throw new Error(`job failed: ${summary.error}`);
  }
  for (const view of summary.views) {
    if (view.candidates.length < 1) {
      throw new Error(`view ${view.index} shows no candidates`);
    }
    console.log(
      `view ${view.index}: ${view.candidates.map((c) => `${c.text}@${c.confidence}`).join(", ")}`,
    );
  }

  // the user deselects the first candidate in view 0
  let selections = defaultSelections(summary.views);
  selections = toggleCandidate(selections, 0, 0);
  const overrides = changedSelections(selections, summary.views);
  console.log(`posting selection overrides: ${JSON.stringify(overrides)}`);
  await api.postSelection(id, overrides);

  summary = await waitDone(api, id);
  if (summary.state !== "done") {
    throw new Error(`re-fuse failed: ${summary.error}`);
  }
  const result = await api.getResult(id);

  const expected = JSON.parse(readFileSync(expectedPath, "utf-8")) as {
    labels: boolean[];
  };
  const got = result.labels;
  if (got.length !== expected.labels.length) {
    throw new Error(`label count ${got.length} != expected ${expected.labels.length}`);
  }
  let mismatches = 0;
  for (let f = 0; f < got.length; f++) {
    if (got[f] !== expected.labels[f]) mismatches++;
  }
  if (mismatches > 0) {
    throw new Error(`${mismatches} label mismatches vs offline selection run`);
  }

  // the highlight the viewer would draw is a verbatim function of labels
  const colors = faceColors(result.mesh.labels);
  for (let f = 0; f < got.length; f++) {
    const red = colors[3 * f] === SEGMENT_COLOR[0] && colors[3 * f + 1] === 0;
    if (red !== got[f]) {
      throw new Error(`face ${f}: highlight diverges from the labels array`);
    }
  }
  console.log(`labels match the offline selection run (${got.length} faces); highlight verbatim`);
}

main().catch((err) => {
  console.error(String(err));
  process.exit(1);
});
