import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function fakeFetch(handler: (url: string, init?: RequestInit) => { status: number; body: unknown }) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const { status, body } = handler(url, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn, calls };
}

describe("ApiClient", () => {
  it("submits multipart jobs and returns the id", async () => {
    const { fn, calls } = fakeFetch(() => ({ status: 202, body: { id: "j123" } }));
    const api = new ApiClient("http://svc:1", fn);
    const id = await api.submitJob(new Blob([new Uint8Array([1])]), "m.obj", "the top", {
      n_views: 4,
    });
    expect(id).toBe("j123");
    expect(calls[0].url).toBe("http://svc:1/api/jobs");
    const form = calls[0].init?.body as FormData;
    expect(form.get("query")).toBe("the top");
    expect(JSON.parse(form.get("config") as string)).toEqual({ n_views: 4 });
  });

  it("returns job summaries untouched (no client-side math)", async () => {
    const summary = {
      id: "j1",
      state: "done",
      query: "q",
      views: [
        {
          index: 0,
          imageUrl: "/api/jobs/j1/views/0.png",
          candidates: [
            { index: 0, confidence: 0.731, text: "a", maskUrl: "/api/jobs/j1/masks/0/0.png" },
          ],
        },
      ],
      selections: {},
    };
    const { fn } = fakeFetch(() => ({ status: 200, body: summary }));
    const api = new ApiClient("http://svc:1", fn);
    expect(await api.getJob("j1")).toEqual(summary);
  });

  it("serializes selections with string view keys", async () => {
    const { fn, calls } = fakeFetch(() => ({ status: 202, body: {} }));
    const api = new ApiClient("http://svc:1/", fn);
    await api.postSelection("j1", { 0: [1], 2: [] });
    expect(calls[0].url).toBe("http://svc:1/api/jobs/j1/selection");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      selections: { "0": [1], "2": [] },
    });
  });

  it("throws ApiError with the status and detail", async () => {
    const { fn } = fakeFetch(() => ({ status: 404, body: { detail: "unknown job x" } }));
    const api = new ApiClient("http://svc:1", fn);
    const err = await api.getJob("x").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(String(err.message)).toContain("unknown job x");
  });

  it("resolves server-relative urls against the base", () => {
    const api = new ApiClient("http://svc:1");
    expect(api.absolute("/api/jobs/j/views/0.png")).toBe("http://svc:1/api/jobs/j/views/0.png");
    expect(api.absolute("http://elsewhere/x.png")).toBe("http://elsewhere/x.png");
  });
});
