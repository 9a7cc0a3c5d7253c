/** Typed client for the session service's JSON API. */

export interface HistoryPoint {
  step: number;
  version_space_size: number;
  err?: number;
  err_c?: number;
}

export interface ThresholdPoint {
  index: number;
  x: number;
  label: number;
}

export interface TripletView {
  index: number;
  leaves: string[];
  displayed: string;
  options: string[];
}

export interface QueryView {
  id: number;
  kind: "threshold" | "triplet" | "labels";
  points?: ThresholdPoint[];
  leaves?: string[];
  subtree?: string;
  triplets?: TripletView[];
  labels?: { index: number; label: number }[];
}

export interface SessionView {
  id: string;
  mode: "oracle" | "authoritative";
  step: number;
  terminated: boolean;
  space: { kind: string; n_hypotheses: number; n_queries: number; c: number };
  version_space_size: number;
  history: HistoryPoint[];
  err?: number;
  err_c?: number;
  query?: QueryView;
  displayed?: (string | number)[];
  final_hypothesis?: { id: number; label: string };
}

export interface SpaceCatalogEntry {
  kind: string;
  example: string;
  description: string;
}

export type FeedbackPayload =
  | { step: number; action: "accept" }
  | { step: number; action: "correct"; component: number; value: string | number };

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let code = "http_error";
    let detail = response.statusText;
    try {
      const body = await response.json();
      code = body.error ?? code;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, String(detail));
  }
  return response.json() as Promise<T>;
}

export class SessionApi {
  constructor(private base: string = "") {}

  listSpaces(): Promise<{ spaces: SpaceCatalogEntry[] }> {
    return request(this.base, "/api/spaces");
  }

  createSession(config: {
    space: string;
    mode: string;
    seed?: number;
  }): Promise<{ id: string; view: SessionView }> {
    return request(this.base, "/api/sessions", {
      method: "POST",
      body: JSON.stringify(config),
    });
  }

  getState(id: string): Promise<SessionView> {
    return request(this.base, `/api/sessions/${id}`);
  }

  submitFeedback(id: string, payload: FeedbackPayload): Promise<SessionView> {
    return request(this.base, `/api/sessions/${id}/feedback`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  async exportTranscript(id: string): Promise<string> {
    const response = await fetch(`${this.base}/api/sessions/${id}/transcript`);
    if (!response.ok) {
      throw new ApiError(response.status, "http_error", response.statusText);
    }
    return response.text();
  }
}
