/**
 * Thin client for the suggestion service. At most one request is in flight;
 * a new request aborts the previous one.
 */

import type { SessionState, Suggestion } from "./session.js";
import { activePair } from "./session.js";

export interface SuggestPayload {
  source: string;
  translation: string;
  span: [number, number];
  hint: string | null;
  k: number;
}

export interface SuggestResponse {
  suggestions: Suggestion[];
  model_id: string;
  latency_ms: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string
  ) {
    super(`server returned ${status}: ${detail}`);
  }
}

export function buildPayload(state: SessionState, k = 3): SuggestPayload {
  if (state.selection === null) {
    throw new Error("no span selected");
  }
  const pair = activePair(state);
  const hint = state.hint.trim();
  return {
    source: pair.source.join(" "),
    translation: pair.translation.join(" "),
    span: state.selection,
    hint: hint === "" ? null : hint,
    k,
  };
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SuggestClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init)
  ) {}

  /** POST /suggest, cancelling any request still in flight. */
  async requestSuggestions(payload: SuggestPayload): Promise<SuggestResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const response = await this.fetchFn(`${this.baseUrl}/suggest`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
        signal: controller.signal,
      });
      if (!response.ok) {
        let detail = response.statusText;
        try {
          const body = (await response.json()) as { error?: string; detail?: string };
          detail = body.detail ?? body.error ?? detail;
        } catch {
          // non-JSON error body; keep the status text
        }
        throw new ApiError(response.status, detail);
      }
      return (await response.json()) as SuggestResponse;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  async health(): Promise<{ status: string; model_id?: string }> {
    const response = await this.fetchFn(`${this.baseUrl}/health`);
    return (await response.json()) as { status: string; model_id?: string };
  }
}
