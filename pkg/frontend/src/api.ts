/**
 * Typed client for the job service API.
 *
 * Every number the viewer shows comes from these responses verbatim; the
 * client never recomputes scores, labels, or confidences.
 */

export type JobState = "rendering" | "segmenting" | "fusing" | "done" | "failed";

export interface CandidateInfo {
  index: number;
  confidence: number;
  text: string;
  maskUrl: string;
}

export interface ViewInfo {
  index: number;
  imageUrl: string;
  candidates: CandidateInfo[];
  failed?: string | null;
}

export interface JobSummary {
  id: string;
  state: JobState;
  query: string;
  views: ViewInfo[];
  selections: Record<string, number[]>;
  error?: string;
}

export interface Explanation {
  view: number;
  text: string;
  confidence: number;
}

export interface MeshPayload {
  vertices: number[][];
  faces: number[][];
  labels: boolean[];
}

export interface JobResult {
  labels: boolean[];
  score: number[];
  visibility: number[];
  explanations: Explanation[];
  config: Record<string, unknown>;
  skipped_views: { view: number; error: string }[];
  mesh: MeshPayload;
  selections?: Record<string, number[]>;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  /** Server-relative URLs (e.g. mask paths) resolved against the base. */
  absolute(url: string): string {
    return url.startsWith("/") ? this.base + url : url;
  }

  async submitJob(
    mesh: Blob,
    filename: string,
    query: string,
    config?: Record<string, unknown>,
  ): Promise<string> {
    const form = new FormData();
    form.append("mesh", mesh, filename);
    form.append("query", query);
    if (config !== undefined) {
      form.append("config", JSON.stringify(config));
    }
    const body = await this.request(`${this.base}/api/jobs`, {
      method: "POST",
      body: form,
    });
    return (body as { id: string }).id;
  }

  async getJob(id: string): Promise<JobSummary> {
    return (await this.request(`${this.base}/api/jobs/${id}`)) as JobSummary;
  }

  async postSelection(id: string, selections: Record<number, number[]>): Promise<void> {
    const payload: Record<string, number[]> = {};
    for (const [view, indices] of Object.entries(selections)) {
      payload[String(view)] = indices;
    }
    await this.request(`${this.base}/api/jobs/${id}/selection`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ selections: payload }),
    });
  }

  async getResult(id: string): Promise<JobResult> {
    return (await this.request(`${this.base}/api/jobs/${id}/result`)) as JobResult;
  }

  private async request(url: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(url, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = `${response.status}: ${body.detail}`;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(detail, response.status);
    }
    return response.json();
  }
}
