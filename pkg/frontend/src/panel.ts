import type { AppState } from "./store.js";

// The panel prints service numbers verbatim (String(n)), so what the user
// reads is exactly what the service answered. Only the gauge geometry is
// computed here, never the numbers.

export interface TextElement {
  textContent: string | null;
}

export interface StyledElement {
  style: { left?: string; width?: string; display?: string };
}

export interface PanelElements {
  value: TextElement;
  ciLo: TextElement;
  ciHi: TextElement;
  bound: TextElement;
  rowsRead: TextElement;
  tilesSplit: TextElement;
  elapsed: TextElement;
  error: TextElement & StyledElement;
  marker: StyledElement;
  band: StyledElement;
}

export function formatNumber(v: number | null): string {
  return v === null ? "—" : String(v);
}

export function markerPosition(value: number, lo: number, hi: number): number {
  if (hi <= lo) return 0.5;
  const f = (value - lo) / (hi - lo);
  return Math.min(1, Math.max(0, f));
}

export function renderPanel(state: AppState, el: PanelElements): void {
  const a = state.answer;
  el.value.textContent = a ? formatNumber(a.value) : "—";
  el.ciLo.textContent = a && a.ci ? formatNumber(a.ci.lo) : "—";
  el.ciHi.textContent = a && a.ci ? formatNumber(a.ci.hi) : "—";
  el.bound.textContent = a ? formatNumber(a.reportedBound) : "—";
  const t = state.telemetry;
  el.rowsRead.textContent = t ? String(t.rowsRead) : "—";
  el.tilesSplit.textContent = t ? String(t.tilesSplit) : "—";
  el.elapsed.textContent = t ? `${t.elapsedUs} µs` : "—";

  if (a && a.ci && a.value !== null) {
    const f = markerPosition(a.value, a.ci.lo, a.ci.hi);
    el.marker.style.left = `${(f * 100).toFixed(2)}%`;
    el.marker.style.display = "";
    el.band.style.display = "";
  } else {
    el.marker.style.display = "none";
    el.band.style.display = "none";
  }

  el.error.textContent = state.lastError ?? "";
  el.error.style.display = state.lastError ? "" : "none";
}

// reported_bound history as a polyline for an inline SVG sparkline
export function sparklinePath(bounds: number[], width: number, height: number): string {
  if (bounds.length === 0) return "";
  const max = Math.max(...bounds, 1e-12);
  const n = bounds.length;
  return bounds
    .map((b, i) => {
      const x = n === 1 ? width / 2 : (i / (n - 1)) * width;
      const y = height - (b / max) * (height - 2) - 1;
      return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
