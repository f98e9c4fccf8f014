import type { RectJson, TileNode, TileSnapshot } from "./api.js";
import type { Viewport } from "./viewport.js";

export interface TileRect {
  bounds: RectJson;
  depth: number;
}

function intersects(a: RectJson, b: RectJson): boolean {
  return a.xMin <= b.xMax && b.xMin <= a.xMax && a.yMin <= b.yMax && b.yMin <= a.yMax;
}

// Leaf rectangles of the (possibly depth-filtered) snapshot that touch the
// view, deepest structure wins: a node with children contributes nothing
// itself, so each drawn rect is an actual tile boundary at the finest
// level the server returned.
export function visibleTileRects(snapshot: TileSnapshot, view: RectJson): TileRect[] {
  const out: TileRect[] = [];
  const walk = (node: TileNode): void => {
    if (!intersects(node.bounds, view)) return;
    if (node.children && node.children.length > 0) {
      for (const child of node.children) walk(child);
    } else {
      out.push({ bounds: node.bounds, depth: node.depth });
    }
  };
  for (const t of snapshot.tiles) walk(t);
  return out;
}

// Subset of CanvasRenderingContext2D the overlay needs; tests stub it.
export interface StrokeContext {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  strokeRect(x: number, y: number, w: number, h: number): void;
}

const DEPTH_COLORS = ["#5b8dd9", "#6fc2a0", "#d9b85b", "#d97f5b", "#c95bd9", "#5bd9d3"];

export function depthColor(depth: number): string {
  return DEPTH_COLORS[Math.min(depth, DEPTH_COLORS.length - 1)];
}

export function drawTileOverlay(ctx: StrokeContext, rects: TileRect[], viewport: Viewport): void {
  for (const { bounds, depth } of rects) {
    const [x0, y1] = viewport.dataToPx(bounds.xMin, bounds.yMin);
    const [x1, y0] = viewport.dataToPx(bounds.xMax, bounds.yMax);
    ctx.strokeStyle = depthColor(depth);
    ctx.lineWidth = Math.max(0.5, 2 - depth * 0.25);
    ctx.globalAlpha = 0.8;
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
  }
  ctx.globalAlpha = 1.0;
}
