/** Typed HTTP client for the world service.
 *
 * The fetch function is injected so tests can run against canned responses
 * and the viewer can pass the browser's fetch. Server errors arrive as
 * {"error": {"code", "message"}} envelopes and surface as ApiError.
 */

import type {
  CreateSessionResponse,
  Manifest,
  PresencePayload,
  StepInput,
  StepResponse,
} from "./types.js";

export interface FetchResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<FetchResponse>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

function defaultFetch(): FetchLike {
  const f = globalThis.fetch;
  if (!f) throw new Error("no fetch available; pass one to ApiClient");
  return f.bind(globalThis) as FetchLike;
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? defaultFetch();
  }

  manifestUrl(): string {
    return `${this.baseUrl}/api/manifest`;
  }

  frameUrl(edgeId: string, frame: number): string {
    return `${this.baseUrl}/api/edges/${encodeURIComponent(edgeId)}/frames/${frame}`;
  }

  walkmapUrl(edgeId: string): string {
    return `${this.baseUrl}/api/edges/${encodeURIComponent(edgeId)}/walkmap`;
  }

  videoUrl(edgeId: string): string {
    return `${this.baseUrl}/api/edges/${encodeURIComponent(edgeId)}/video`;
  }

  async manifest(): Promise<Manifest> {
    return (await this.request(this.manifestUrl())) as Manifest;
  }

  async createSession(spawn?: string): Promise<CreateSessionResponse> {
    const body = spawn === undefined ? {} : { spawn };
    return (await this.request(`${this.baseUrl}/api/sessions`, body)) as CreateSessionResponse;
  }

  async sendInput(sessionId: string, input: StepInput): Promise<StepResponse> {
    const url = `${this.baseUrl}/api/sessions/${encodeURIComponent(sessionId)}/input`;
    return (await this.request(url, input)) as StepResponse;
  }

  async presence(): Promise<PresencePayload> {
    return (await this.request(`${this.baseUrl}/api/presence`)) as PresencePayload;
  }

  private async request(url: string, post?: unknown): Promise<unknown> {
    const init: RequestInit | undefined =
      post === undefined
        ? undefined
        : {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(post),
          };
    const resp = await this.fetchFn(url, init);
    let payload: unknown = null;
    try {
      payload = await resp.json();
    } catch {
      payload = null;
    }
    if (resp.status >= 200 && resp.status < 300) return payload;
    const env = payload as { error?: { code?: string; message?: string } } | null;
    const code = env?.error?.code ?? `http_${resp.status}`;
    const message = env?.error?.message ?? `request failed with status ${resp.status}`;
    throw new ApiError(resp.status, code, message);
  }
}
