import type { Viewport } from "./viewport.js";

export interface FillContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

// Decorative context layer: up to the service's point cap, drawn as 2px
// squares. Correctness lives in the answer panel, not here.
export function drawScatter(ctx: FillContext, points: [number, number][], viewport: Viewport): void {
  ctx.clearRect(0, 0, viewport.widthPx, viewport.heightPx);
  ctx.fillStyle = "#9ecbff";
  ctx.globalAlpha = 0.7;
  for (const [x, y] of points) {
    const [px, py] = viewport.dataToPx(x, y);
    ctx.fillRect(px - 1, py - 1, 2, 2);
  }
  ctx.globalAlpha = 1.0;
}
