/** Thin fetch client for the gateway; errors carry the failing stage so the
 * UI can toast it without blocking. */

import type { IntroRequest, IntroResponse, SuggestionBatch, WorkRecord } from "./types.js";

export class GatewayError extends Error {
  status: number;
  stage: string | null;
  partialTrace: IntroResponse["trace"] | null;

  constructor(status: number, message: string, stage: string | null, partialTrace: IntroResponse["trace"] | null = null) {
    super(message);
    this.status = status;
    this.stage = stage;
    this.partialTrace = partialTrace;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorFrom(response: Response): Promise<GatewayError> {
  let body: Record<string, unknown> = {};
  try {
    body = (await response.json()) as Record<string, unknown>;
  } catch {
    // non-JSON error body; keep the status alone
  }
  const stage = typeof body.stage === "string" ? body.stage : null;
  const message = typeof body.error === "string" ? body.error : `request failed (${response.status})`;
  const trace = (body.trace ?? null) as IntroResponse["trace"] | null;
  return new GatewayError(response.status, message, stage, trace);
}

export class GatewayClient {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return (await response.json()) as T;
  }

  suggest(document: string, cursor: number, bibtex: string, maxSuggestions?: number): Promise<SuggestionBatch> {
    return this.post<SuggestionBatch>("/suggest", {
      document,
      cursor,
      bibtex,
      ...(maxSuggestions ? { max_suggestions: maxSuggestions } : {}),
    });
  }

  intro(request: IntroRequest): Promise<IntroResponse> {
    return this.post<IntroResponse>("/intro", request);
  }

  async work(id: string): Promise<WorkRecord | null> {
    const response = await this.fetchFn(`${this.baseUrl}/works/${encodeURIComponent(id)}`);
    if (response.status === 404) return null;
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as WorkRecord;
  }

  async health(): Promise<{ version: string; index_count: number }> {
    const response = await this.fetchFn(`${this.baseUrl}/health`);
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as { version: string; index_count: number };
  }
}
