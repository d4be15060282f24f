/** Page wiring: upload, poll, candidate selection, fused-result viewer. */

import { ApiClient, type JobResult, type JobSummary } from "./api.js";
import { compositeMask, maskBytesFromRgba } from "./overlay.js";
import {
  changedSelections,
  defaultSelections,
  isBusy,
  pollDelayMs,
  toggleCandidate,
  type Selections,
} from "./state.js";
import { MeshViewer } from "./viewer3d.js";

const MAX_UPLOAD_BYTES = 64 * 1024 * 1024;

const api = new ApiClient(window.location.origin);
const el = (id: string) => document.getElementById(id)!;

let jobId: string | null = null;
let selections: Selections = {};
let lastSummary: JobSummary | null = null;
let viewer: MeshViewer | null = null;

function setStatus(text: string, isError = false): void {
  const node = el("status");
  node.textContent = text;
  node.className = isError ? "error" : "";
}

function wireForm(): void {
  const form = el("submit-form") as HTMLFormElement;
  const meshInput = el("mesh-file") as HTMLInputElement;
  const queryInput = el("query-text") as HTMLInputElement;
  const submit = el("submit-button") as HTMLButtonElement;

  const refresh = () => {
    submit.disabled = !queryInput.value.trim() || !meshInput.files?.length;
  };
  meshInput.addEventListener("change", refresh);
  queryInput.addEventListener("input", refresh);
  refresh();

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const file = meshInput.files?.[0];
    if (!file) return;
    if (file.size > MAX_UPLOAD_BYTES) {
      setStatus(`mesh is ${file.size} bytes; the limit is ${MAX_UPLOAD_BYTES}`, true);
      return;
    }
    let config: Record<string, unknown> | undefined;
    const rawConfig = (el("config-text") as HTMLTextAreaElement).value.trim();
    if (rawConfig) {
      try {
        config = JSON.parse(rawConfig);
      } catch {
        setStatus("config is not valid JSON", true);
        return;
      }
    }
    try {
      setStatus("submitting...");
      jobId = await api.submitJob(file, file.name, queryInput.value.trim(), config);
      selections = {};
      setStatus(`job ${jobId} submitted`);
      void poll();
    } catch (err) {
      setStatus(`submit failed: ${String(err)} (retry when the service is back)`, true);
    }
  });
}

async function poll(): Promise<void> {
  if (!jobId) return;
  let summary: JobSummary;
  try {
    summary = await api.getJob(jobId);
  } catch (err) {
    setStatus(`poll failed: ${String(err)}`, true);
    return;
  }
  lastSummary = summary;
  setStatus(`state: ${summary.state}${summary.error ? ` — ${summary.error}` : ""}`,
    summary.state === "failed");
  renderViews(summary);
  (el("refuse-button") as HTMLButtonElement).disabled = isBusy(summary.state);
  if (summary.state === "done") {
    if (Object.keys(selections).length === 0) {
      selections = defaultSelections(summary.views);
    }
    await showResult();
  }
  const delay = pollDelayMs(summary.state);
  if (delay !== null) {
    setTimeout(() => void poll(), delay);
  }
}

function renderViews(summary: JobSummary): void {
  const host = el("views");
  host.textContent = "";
  for (const view of summary.views) {
    const card = document.createElement("div");
    card.className = "view-card";
    const title = document.createElement("h3");
    title.textContent = `view ${view.index}`;
    card.appendChild(title);
    if (view.failed) {
      const warn = document.createElement("p");
      warn.className = "error";
      warn.textContent = `skipped: ${view.failed}`;
      card.appendChild(warn);
    }
    const canvas = document.createElement("canvas");
    card.appendChild(canvas);
    void drawThumbnail(canvas, view.index, summary);
    for (const cand of view.candidates) {
      const row = document.createElement("label");
      row.className = "candidate-row";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = (selections[view.index] ?? view.candidates.map((c) => c.index)).includes(
        cand.index,
      );
      box.disabled = isBusy(summary.state);
      box.addEventListener("change", () => {
        selections = toggleCandidate(
          Object.keys(selections).length ? selections : defaultSelections(summary.views),
          view.index,
          cand.index,
        );
        void drawThumbnail(canvas, view.index, summary);
      });
      row.appendChild(box);
      const text = document.createElement("span");
      text.textContent = ` ${cand.text} (${cand.confidence.toFixed(2)})`;
      row.appendChild(text);
      card.appendChild(row);
    }
    host.appendChild(card);
  }
}

async function loadRgba(url: string): Promise<{ data: Uint8ClampedArray; w: number; h: number }> {
  const img = new Image();
  img.src = api.absolute(url);
  await img.decode();
  const canvas = document.createElement("canvas");
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(img, 0, 0);
  const data = ctx.getImageData(0, 0, canvas.width, canvas.height);
  return { data: data.data, w: canvas.width, h: canvas.height };
}

async function drawThumbnail(
  canvas: HTMLCanvasElement,
  viewIndex: number,
  summary: JobSummary,
): Promise<void> {
  const view = summary.views.find((v) => v.index === viewIndex);
  if (!view) return;
  try {
    const base = await loadRgba(view.imageUrl);
    let pixels = base.data;
    const chosen = selections[view.index] ?? view.candidates.map((c) => c.index);
    for (const cand of view.candidates) {
      if (!chosen.includes(cand.index)) continue;
      const mask = await loadRgba(cand.maskUrl);
      pixels = compositeMask(pixels, maskBytesFromRgba(mask.data));
    }
    canvas.width = base.w;
    canvas.height = base.h;
    canvas
      .getContext("2d")!
      .putImageData(new ImageData(new Uint8ClampedArray(pixels), base.w, base.h), 0, 0);
  } catch {
    // thumbnails are best-effort while the job is still rendering
  }
}

async function showResult(): Promise<void> {
  if (!jobId) return;
  let result: JobResult;
  try {
    result = await api.getResult(jobId);
  } catch (err) {
    setStatus(`result fetch failed: ${String(err)}`, true);
    return;
  }
  viewer ??= new MeshViewer(el("mesh-canvas") as HTMLCanvasElement);
  viewer.show(result.mesh);
  const list = el("explanations");
  list.textContent = "";
  for (const item of result.explanations) {
    const li = document.createElement("li");
    li.textContent = `view ${item.view}: ${item.text} (${item.confidence.toFixed(2)})`;
    list.appendChild(li);
  }
  el("label-count").textContent =
    `${result.labels.filter(Boolean).length} of ${result.labels.length} faces labeled`;
}

function wireRefuse(): void {
  (el("refuse-button") as HTMLButtonElement).addEventListener("click", async () => {
    if (!jobId || !lastSummary) return;
    const overrides = changedSelections(selections, lastSummary.views);
    try {
      await api.postSelection(jobId, overrides);
      setStatus("re-fusing with the selected candidates...");
      void poll();
    } catch (err) {
      setStatus(`selection rejected: ${String(err)}`, true);
    }
  });
}

wireForm();
wireRefuse();
