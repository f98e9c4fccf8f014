import type { RectJson } from "./api.js";

// Single source of truth for the visible window, in axis units. The rect is
// always kept inside the dataset domain: pans slide along the walls, zooms
// cap at the full domain.
export class Viewport {
  domain: RectJson = { xMin: 0, xMax: 1, yMin: 0, yMax: 1 };
  rect: RectJson = { xMin: 0, xMax: 1, yMin: 0, yMax: 1 };
  widthPx = 1;
  heightPx = 1;

  setCanvasSize(widthPx: number, heightPx: number): void {
    this.widthPx = Math.max(1, widthPx);
    this.heightPx = Math.max(1, heightPx);
  }

  setDomain(domain: RectJson): void {
    this.domain = { ...domain };
    this.rect = { ...domain };
  }

  get spanX(): number {
    return Math.max(1e-12, this.rect.xMax - this.rect.xMin);
  }

  get spanY(): number {
    return Math.max(1e-12, this.rect.yMax - this.rect.yMin);
  }

  // canvas y grows downward, axis y upward
  dataToPx(x: number, y: number): [number, number] {
    return [
      ((x - this.rect.xMin) / this.spanX) * this.widthPx,
      (1 - (y - this.rect.yMin) / this.spanY) * this.heightPx,
    ];
  }

  pxToData(px: number, py: number): [number, number] {
    return [
      this.rect.xMin + (px / this.widthPx) * this.spanX,
      this.rect.yMin + (1 - py / this.heightPx) * this.spanY,
    ];
  }

  panPx(dxPx: number, dyPx: number): void {
    const dx = (-dxPx / this.widthPx) * this.spanX;
    const dy = (dyPx / this.heightPx) * this.spanY;
    this.translate(dx, dy);
  }

  translate(dx: number, dy: number): void {
    const w = this.spanX;
    const h = this.spanY;
    let x0 = this.rect.xMin + dx;
    let y0 = this.rect.yMin + dy;
    x0 = Math.min(Math.max(x0, this.domain.xMin), this.domain.xMax - w);
    y0 = Math.min(Math.max(y0, this.domain.yMin), this.domain.yMax - h);
    this.rect = { xMin: x0, xMax: x0 + w, yMin: y0, yMax: y0 + h };
  }

  zoom(factor: number, anchorPx: number, anchorPy: number): void {
    const [ax, ay] = this.pxToData(anchorPx, anchorPy);
    let w = this.spanX / factor;
    let h = this.spanY / factor;
    w = Math.min(w, this.domain.xMax - this.domain.xMin);
    h = Math.min(h, this.domain.yMax - this.domain.yMin);
    let x0 = ax - ((ax - this.rect.xMin) / this.spanX) * w;
    let y0 = ay - ((ay - this.rect.yMin) / this.spanY) * h;
    x0 = Math.min(Math.max(x0, this.domain.xMin), this.domain.xMax - w);
    y0 = Math.min(Math.max(y0, this.domain.yMin), this.domain.yMax - h);
    this.rect = { xMin: x0, xMax: x0 + w, yMin: y0, yMax: y0 + h };
  }

  insideDomain(): boolean {
    return (
      this.rect.xMin >= this.domain.xMin &&
      this.rect.xMax <= this.domain.xMax &&
      this.rect.yMin >= this.domain.yMin &&
      this.rect.yMax <= this.domain.yMax
    );
  }
}
