/** Typed client for the workbench API.
 *
 * Every response body is kept in `responses` so tests (and the thin-client
 * audit) can check that each number the UI shows came over the wire and was
 * not computed locally.
 */

import type {
  ApiErrorDoc, EventDoc, IrrDoc, LabelDoc, ScatterDoc, SequencesResponse,
  SessionDetail, SessionSummary, StateGraphDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public code: string, message: string,
              public details: Record<string, unknown> = {}) {
    super(message);
  }
}

export interface EventQuery {
  from?: number;
  to?: number;
  units?: string[];
  teams?: string[];
  types?: string[];
}

export interface ScatterQuery {
  rater: string;
  metric?: string;
  k?: number;
  seed?: number;
  mode?: string;
}

function query(params: Record<string, string | number | undefined>): string {
  const parts = Object.entries(params)
    .filter(([, v]) => v !== undefined && v !== "")
    .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`);
  return parts.length ? "?" + parts.join("&") : "";
}

export class ApiClient {
  /** Raw response bodies, in arrival order. */
  readonly responses: string[] = [];

  constructor(private baseUrl: string, private fetchFn?: FetchLike) {}

  private async request<T>(method: string, path: string,
                           body?: unknown, headers?: Record<string, string>): Promise<T> {
    const doFetch = this.fetchFn ?? fetch;
    const res = await doFetch(this.baseUrl + path, {
      method,
      headers: {
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
        ...headers,
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const text = await res.text();
    if (!res.ok) {
      let doc: ApiErrorDoc | null = null;
      try {
        doc = JSON.parse(text) as ApiErrorDoc;
      } catch {
        // non-JSON error body: fall through to the generic error below
      }
      if (doc?.error) throw new ApiError(doc.error.code, doc.error.message, doc.error.details);
      throw new ApiError("http_" + res.status, text || res.statusText);
    }
    this.responses.push(text);
    return JSON.parse(text) as T;
  }

  sessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request("GET", "/sessions");
  }

  session(id: string): Promise<SessionDetail> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}`);
  }

  events(id: string, q: EventQuery = {}): Promise<{ events: EventDoc[] }> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/events` + query({
      from: q.from, to: q.to,
      units: q.units?.join(","), teams: q.teams?.join(","), types: q.types?.join(","),
    }));
  }

  labels(id: string, author?: string, name?: string): Promise<{ labels: LabelDoc[] }> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/labels`
      + query({ author, name }));
  }

  createLabel(id: string, body: {
    name: string; start_ms: number; end_ms: number;
    unit_ids: string[]; event_ids: string[]; author: string;
  }): Promise<LabelDoc> {
    return this.request("POST", `/sessions/${encodeURIComponent(id)}/labels`, body);
  }

  updateLabel(labelId: string, expectedRevision: number,
              patch: Partial<Pick<LabelDoc, "name" | "start_ms" | "end_ms" | "unit_ids" | "event_ids">>): Promise<LabelDoc> {
    return this.request("PUT", `/labels/${encodeURIComponent(labelId)}`, patch,
                        { "Expected-Revision": String(expectedRevision) });
  }

  deleteLabel(labelId: string, expectedRevision: number): Promise<{ deleted: string }> {
    return this.request("DELETE", `/labels/${encodeURIComponent(labelId)}`, undefined,
                        { "Expected-Revision": String(expectedRevision) });
  }

  sequences(id: string, rater: string, scope: "player" | "team",
            round?: number): Promise<SequencesResponse> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/sequences`
      + query({ rater, scope, round }));
  }

  stateGraph(id: string, rater: string, scope: "player" | "team" = "player",
             round?: number): Promise<StateGraphDoc> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/graphs/state`
      + query({ rater, scope, round }));
  }

  sequenceGraph(id: string, q: ScatterQuery): Promise<ScatterDoc> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/graphs/sequence`
      + query({ rater: q.rater, metric: q.metric, k: q.k, seed: q.seed, mode: q.mode }));
  }

  groupGraph(id: string, q: ScatterQuery): Promise<ScatterDoc> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/graphs/group`
      + query({ rater: q.rater, metric: q.metric, k: q.k, seed: q.seed, mode: q.mode }));
  }

  irr(id: string, raterA: string, raterB: string, binMs?: number): Promise<IrrDoc> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/irr`
      + query({ raterA, raterB, bin_ms: binMs }));
  }

  revision(id: string): Promise<{ revision: number }> {
    return this.request("GET", `/sessions/${encodeURIComponent(id)}/revision`);
  }
}

/** Serializes a view's refreshes: resolves to null for responses that are
 * stale by the time they land (a newer request was issued meanwhile). */
export class LatestOnly {
  private ticket = 0;

  async run<T>(fn: () => Promise<T>): Promise<T | null> {
    const mine = ++this.ticket;
    const result = await fn();
    return mine === this.ticket ? result : null;
  }
}
