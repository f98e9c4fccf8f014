import type { QueryResponse, QueryResult, Telemetry } from "./api.js";

export interface HistoryPoint {
  reportedBound: number;
  rowsRead: number;
  elapsedUs: number;
}

export const PHI_PRESETS: (number | null)[] = [null, 0.01, 0.05, 0.1];
export const HISTORY_LIMIT = 60;

// Application state. applyResponse stores the service's numbers verbatim;
// nothing here aggregates, rounds or recomputes.
export class AppState {
  phi: number | null = 0.05;
  func = "mean";
  attribute: string | null = null;
  overlayTiles = true;
  overlayPoints = true;

  answer: QueryResult | null = null;
  telemetry: Telemetry | null = null;
  history: HistoryPoint[] = [];
  lastError: string | null = null;

  applyResponse(resp: QueryResponse): void {
    this.answer = resp.results[0] ?? null;
    this.telemetry = resp.telemetry;
    this.lastError = null;
    if (this.answer) {
      this.history.push({
        reportedBound: this.answer.reportedBound,
        rowsRead: resp.telemetry.rowsRead,
        elapsedUs: resp.telemetry.elapsedUs,
      });
      if (this.history.length > HISTORY_LIMIT) this.history.shift();
    }
  }

  applyError(message: string): void {
    // keep the last good answer on screen
    this.lastError = message;
  }
}
