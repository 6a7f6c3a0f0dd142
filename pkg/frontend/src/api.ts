/**
 * Typed client for the explanation service.
 *
 * Every number shown in the UI comes from these responses; nothing is
 * recomputed client-side.
 */

export interface SessionSummary {
  id: string;
  name: string;
  task: "regression" | "classification";
  n: number;
  p: number;
  class_names?: string[];
}

export interface FeatureEntry {
  name: string;
  index: number;
  quantile_levels: Array<number | string>;
  probe_values: Array<number | string>;
  predictions: number[];
  effects: number[];
  importance: number;
}

export interface LocalDocument {
  kind: "local";
  row: number;
  baseline: Array<number | string>;
  actual_prediction: number;
  observation_quantile: Array<number | null>;
  ranking: number[];
  features: FeatureEntry[];
}

export interface ClassificationLocalDocument {
  kind: "classification-local";
  classes: string[];
  per_class: LocalDocument[];
  stacked_importance: number[];
  ranking: number[];
  row: number;
}

export type LocalExplanation = LocalDocument | ClassificationLocalDocument;

export interface WhatIfResponse {
  original: number | number[];
  modified: number | number[];
  delta: number | number[];
}

export type EditMap = Record<string, number | string>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      const message =
        body && typeof body.error === "string"
          ? body.error
          : `request failed with status ${res.status}`;
      throw new ApiError(res.status, message);
    }
    return body as T;
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request<SessionSummary[]>("/sessions");
  }

  localExplanation(sessionId: string, row: number): Promise<LocalExplanation> {
    return this.request<LocalExplanation>(
      `/sessions/${encodeURIComponent(sessionId)}/explain/local/${row}`,
    );
  }

  whatIf(sessionId: string, row: number, edits: EditMap): Promise<WhatIfResponse> {
    return this.request<WhatIfResponse>(
      `/sessions/${encodeURIComponent(sessionId)}/whatif`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ row, edits }),
      },
    );
  }
}
