/**
 * View state and the controller driving it.
 *
 * Pending edits accumulate across features; every adjustment POSTs the
 * full edit map. In-flight what-if requests are serialized by issuing a
 * sequence number per request and discarding responses that arrive
 * after a newer edit superseded them.
 */

import {
  ApiClient,
  EditMap,
  LocalDocument,
  LocalExplanation,
  WhatIfResponse,
} from "./api.js";

export interface ViewState {
  sessionId: string | null;
  row: number | null;
  document: LocalExplanation | null;
  pendingEdits: EditMap;
  lastWhatIf: WhatIfResponse | null;
  /** Message surfaced in the UI's error banner; null when healthy. */
  error: string | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    row: null,
    document: null,
    pendingEdits: {},
    lastWhatIf: null,
    error: null,
  };
}

/** The regression body of a document (first class slice for bundles). */
export function primaryBody(doc: LocalExplanation): LocalDocument {
  if (doc.kind === "classification-local") {
    const body = doc.per_class[0];
    if (!body) throw new Error("classification document carries no classes");
    return body;
  }
  return doc;
}

export function featureNames(doc: LocalExplanation): string[] {
  return primaryBody(doc).features.map((f) => f.name);
}

/** The prediction the UI displays: the last what-if result if present,
 * otherwise the served actual prediction. */
export function displayedPrediction(state: ViewState): number | number[] | null {
  if (state.lastWhatIf !== null) return state.lastWhatIf.modified;
  if (state.document !== null) {
    return primaryBody(state.document).actual_prediction;
  }
  return null;
}

export class WhatIfController {
  private state: ViewState = initialState();
  private sequence = 0;
  private readonly listeners: Array<(s: ViewState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: (s: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private setState(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Fetch a row's local document; clears pending edits and results. */
  async selectObservation(sessionId: string, row: number): Promise<void> {
    this.sequence += 1; // orphan any in-flight what-if
    try {
      const document = await this.api.localExplanation(sessionId, row);
      this.setState({
        sessionId,
        row,
        document,
        pendingEdits: {},
        lastWhatIf: null,
        error: null,
      });
    } catch (err) {
      this.setState({ error: err instanceof Error ? err.message : String(err) });
    }
  }

  /** Record one edit and re-evaluate the full pending map. */
  async adjustFeature(feature: string, value: number | string): Promise<void> {
    const { sessionId, row, document } = this.state;
    if (sessionId === null || row === null || document === null) {
      throw new Error("no observation selected");
    }
    if (!featureNames(document).includes(feature)) {
      throw new Error(`unknown feature ${JSON.stringify(feature)}`);
    }
    const pendingEdits = { ...this.state.pendingEdits, [feature]: value };
    this.setState({ pendingEdits });
    await this.evaluate(sessionId, row, pendingEdits);
  }

  /** Clear all edits; the displayed prediction returns to the served
   * actual prediction without another network round trip. */
  reset(): void {
    this.sequence += 1; // discard any in-flight response
    this.setState({ pendingEdits: {}, lastWhatIf: null, error: null });
  }

  private async evaluate(
    sessionId: string,
    row: number,
    edits: EditMap,
  ): Promise<void> {
    this.sequence += 1;
    const ticket = this.sequence;
    try {
      const response = await this.api.whatIf(sessionId, row, edits);
      if (ticket !== this.sequence) return; // superseded; drop silently
      this.setState({ lastWhatIf: response, error: null });
    } catch (err) {
      if (ticket !== this.sequence) return;
      this.setState({ error: err instanceof Error ? err.message : String(err) });
    }
  }
}
