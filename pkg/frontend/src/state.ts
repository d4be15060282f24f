/** Selection bookkeeping and polling cadence; pure functions, no DOM. */

import type { JobState, ViewInfo } from "./api.js";

export type Selections = Record<number, number[]>;

/** Everything selected: the server's default filtering stays in charge. */
export function defaultSelections(views: ViewInfo[]): Selections {
  const out: Selections = {};
  for (const view of views) {
    out[view.index] = view.candidates.map((c) => c.index);
  }
  return out;
}

export function toggleCandidate(
  selections: Selections,
  view: number,
  candidate: number,
): Selections {
  const out: Selections = {};
  for (const [k, v] of Object.entries(selections)) {
    out[Number(k)] = [...v];
  }
  const current = out[view] ?? [];
  out[view] = current.includes(candidate)
    ? current.filter((i) => i !== candidate)
    : [...current, candidate].sort((a, b) => a - b);
  return out;
}

/**
 * Views whose selection differs from "all candidates": only those are sent,
 * so unchanged views keep the server's default top-k behavior.
 */
export function changedSelections(selections: Selections, views: ViewInfo[]): Selections {
  const out: Selections = {};
  for (const view of views) {
    const all = view.candidates.map((c) => c.index);
    const chosen = selections[view.index] ?? all;
    const same =
      chosen.length === all.length && all.every((i) => chosen.includes(i));
    if (!same) {
      out[view.index] = [...chosen].sort((a, b) => a - b);
    }
  }
  return out;
}

/** Poll interval while a job is in flight; null once it settled. */
export function pollDelayMs(state: JobState): number | null {
  return state === "done" || state === "failed" ? null : 1000;
}

export function isBusy(state: JobState): boolean {
  return state === "rendering" || state === "segmenting" || state === "fusing";
}
