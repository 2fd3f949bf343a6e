// Typed client for the session service. The UI performs no inference:
// every probability it shows comes out of these responses.

export interface LotteryView {
  payoffs: number[];
  probs: number[];
}

export interface PairView {
  pair_index: number;
  lottery1: LotteryView;
  lottery2: LotteryView;
}

export interface TopPoint {
  theory: string;
  params: number[];
  weight: number;
}

export interface PosteriorSummary {
  session_id: string;
  history_length: number;
  status: "active" | "completed";
  theory_marginals: Record<string, number>;
  map_theory: string | null;
  top_points: TopPoint[];
}

export interface CreateResponse {
  session_id: string;
  budget: number;
  k: number;
  test: PairView;
}

export interface AnswerResponse {
  posterior: PosteriorSummary;
  next_test?: PairView;
  completed?: boolean;
}

export interface LogResponse {
  records: Record<string, unknown>[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Single configuration point: where the service lives. */
export function defaultBaseUrl(): string {
  const g = globalThis as { EDGECUT_BASE_URL?: string };
  if (g.EDGECUT_BASE_URL) return g.EDGECUT_BASE_URL;
  if (typeof window !== "undefined") {
    const fromQuery = new URLSearchParams(window.location.search).get("api");
    if (fromQuery) return fromQuery;
  }
  return "http://127.0.0.1:8000";
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    const body = await response.text();
    throw new ApiError(response.status, body || response.statusText);
  }
  return (await response.json()) as T;
}

export class Api {
  constructor(private readonly baseUrl: string = defaultBaseUrl()) {}

  createSession(config?: Record<string, unknown>): Promise<CreateResponse> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config ? { config } : {}),
    });
  }

  answer(sessionId: string, choice: 1 | 2, k?: number): Promise<AnswerResponse> {
    return request(`${this.baseUrl}/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(k === undefined ? { choice } : { choice, k }),
    });
  }

  posterior(sessionId: string): Promise<PosteriorSummary> {
    return request(`${this.baseUrl}/sessions/${sessionId}/posterior`);
  }

  log(sessionId: string): Promise<LogResponse> {
    return request(`${this.baseUrl}/sessions/${sessionId}/log`);
  }
}
