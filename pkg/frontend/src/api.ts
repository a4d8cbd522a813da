// Typed client for the review service HTTP API.

export interface CandidateView {
  id: string;
  png: string;
  csv: string;
  seed?: number | null;
  satisfied?: boolean | null;
  value?: number | null;
}

export interface ExemplarView {
  id: string;
  png: string;
  csv: string;
}

export interface HistoryEntry {
  iteration: number;
  gamma?: number | null;
  p_star?: number[] | null;
  decision?: string | null;
}

export interface SessionView {
  id: string;
  state: string;
  iteration: number;
  capped: boolean;
  error: string | null;
  gamma: number | null;
  p: number[] | null;
  gamma_iteration: number | null;
  negatives: number;
  candidates: CandidateView[];
  history: HistoryEntry[];
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // non-JSON error bodies fall through with an empty detail
    }
    if (!resp.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(id)}`);
  }

  getExemplars(id: string): Promise<{ exemplars: ExemplarView[] }> {
    return this.request(`/sessions/${encodeURIComponent(id)}/exemplars`);
  }

  getHistory(id: string): Promise<{ history: HistoryEntry[] }> {
    return this.request(`/sessions/${encodeURIComponent(id)}/history`);
  }

  postDecision(id: string, decision: "approve" | "reject"): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(id)}/decision`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ decision }),
    });
  }

  createSession(body: {
    positive_manifest: string;
    negative_manifest: string;
    config: unknown;
    id?: string;
  }): Promise<SessionView> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
