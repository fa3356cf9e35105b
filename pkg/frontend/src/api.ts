import type {
  CandidatePayload,
  CreateSessionRequest,
  CreateSessionResponse,
  DatasetInfo,
  LabelResponse,
  Metrics,
  SessionSummary,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface Api {
  listDatasets(): Promise<DatasetInfo[]>;
  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse>;
  getCandidate(sid: string, k?: number): Promise<CandidatePayload>;
  submitLabel(sid: string, index: number, label: 0 | 1): Promise<LabelResponse>;
  getMetrics(sid: string): Promise<Metrics>;
  getSession(sid: string): Promise<SessionSummary>;
}

export class HttpApi implements Api {
  constructor(private readonly base: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.base + path, init);
    if (!res.ok) {
      let body: { code?: string; message?: string; field?: string } = {};
      try {
        body = await res.json();
      } catch {
        // non-JSON error body; fall back to the status line
      }
      throw new ApiError(
        res.status,
        body.code ?? "http_error",
        body.message ?? res.statusText,
        body.field,
      );
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async listDatasets(): Promise<DatasetInfo[]> {
    const doc = await this.request<{ datasets: DatasetInfo[] }>("/datasets");
    return doc.datasets;
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.post("/sessions", req);
  }

  getCandidate(sid: string, k = 10): Promise<CandidatePayload> {
    return this.request(`/sessions/${encodeURIComponent(sid)}/candidate?k=${k}`);
  }

  submitLabel(sid: string, index: number, label: 0 | 1): Promise<LabelResponse> {
    return this.post(`/sessions/${encodeURIComponent(sid)}/labels`, { index, label });
  }

  getMetrics(sid: string): Promise<Metrics> {
    return this.request(`/sessions/${encodeURIComponent(sid)}/metrics`);
  }

  getSession(sid: string): Promise<SessionSummary> {
    return this.request(`/sessions/${encodeURIComponent(sid)}`);
  }
}
