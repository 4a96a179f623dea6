import type {
  Preference,
  RulePayload,
  SessionRequest,
  SessionView,
  StatsRecord,
} from "./types.js";

/** Non-2xx response, carrying the HTTP status and the server's detail text. */
export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface ApiClient {
  createSession(cfg: SessionRequest): Promise<SessionView>;
  getSession(id: string): Promise<SessionView>;
  answer(id: string, iteration: number, preference: Preference): Promise<SessionView>;
  ranking(id: string, top: number): Promise<RulePayload[]>;
  stats(id: string): Promise<StatsRecord[]>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpApiClient implements ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      body = null;
    }
    if (!resp.ok) {
      const detail =
        body !== null && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : `${resp.status} ${resp.statusText}`;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  createSession(cfg: SessionRequest): Promise<SessionView> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(cfg),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  answer(id: string, iteration: number, preference: Preference): Promise<SessionView> {
    return this.request(`/sessions/${id}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ iteration, preference }),
    });
  }

  ranking(id: string, top: number): Promise<RulePayload[]> {
    return this.request(`/sessions/${id}/ranking?top=${top}`);
  }

  stats(id: string): Promise<StatsRecord[]> {
    return this.request(`/sessions/${id}/stats`);
  }
}
