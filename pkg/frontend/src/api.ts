// Minimal typed client for the policy service. One request helper, one
// method per endpoint, errors surfaced with the server's detail payload.

import type {
  Decision,
  DerivationDoc,
  DutyRow,
  EventDelta,
  GraphDoc,
  SessionCreated,
  SessionInfo,
  StrategyReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ApiError";
  }
}

type Query = Record<string, string | number | undefined>;

export type Fetcher = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(
    private readonly base: string = "",
    private readonly fetcher: Fetcher = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    query?: Query,
  ): Promise<T> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query ?? {})) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    const resp = await this.fetcher(`${this.base}${path}${qs ? `?${qs}` : ""}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (resp.status === 204) return undefined as T;
    const data: unknown = await resp.json().catch(() => null);
    if (!resp.ok) {
      const detail =
        data !== null && typeof data === "object" && "detail" in data
          ? (data as { detail: unknown }).detail
          : data;
      throw new ApiError(resp.status, detail ?? resp.statusText);
    }
    return data as T;
  }

  createSession(policy: unknown, freshHistory = false): Promise<SessionCreated> {
    const body = freshHistory ? { policy, fresh_history: true } : policy;
    return this.request("POST", "/sessions", body);
  }

  listSessions(): Promise<{ sessions: SessionInfo[] }> {
    return this.request("GET", "/sessions");
  }

  graph(sid: string, q: { view?: "default" | "full"; at?: number } = {}): Promise<GraphDoc> {
    return this.request("GET", `/sessions/${sid}/graph`, undefined, {
      view: q.view,
      at: q.at,
    });
  }

  relations(sid: string, at?: number): Promise<Record<string, unknown>> {
    return this.request("GET", `/sessions/${sid}/relations`, undefined, { at });
  }

  derivation(sid: string): Promise<DerivationDoc> {
    return this.request("GET", `/sessions/${sid}/derivation`);
  }

  inject(sid: string, events: Array<Record<string, unknown>>): Promise<EventDelta> {
    return this.request("POST", `/sessions/${sid}/events`, { events });
  }

  runStrategy(
    sid: string,
    req: { script: string; seed?: number; budget?: number },
  ): Promise<StrategyReport> {
    return this.request("POST", `/sessions/${sid}/strategy`, req);
  }

  decide(sid: string, p: string, a: string, r: string): Promise<Decision> {
    return this.request("GET", `/sessions/${sid}/decide`, undefined, { p, a, r });
  }

  duties(
    sid: string,
    filter: { principal?: string; state?: string } = {},
  ): Promise<{ duties: DutyRow[] }> {
    return this.request("GET", `/sessions/${sid}/duties`, undefined, {
      principal: filter.principal,
      state: filter.state,
    });
  }

  fork(sid: string, at?: number): Promise<SessionCreated> {
    return this.request("POST", `/sessions/${sid}/fork`, at === undefined ? {} : { at });
  }

  remove(sid: string): Promise<void> {
    return this.request("DELETE", `/sessions/${sid}`);
  }
}
