import { ApiClient } from "./api.js";
import { QueryController } from "./controller.js";
import { Debouncer } from "./debounce.js";
import { drawTileOverlay, visibleTileRects } from "./overlay.js";
import { PanelElements, renderPanel, sparklinePath } from "./panel.js";
import { drawScatter } from "./scatter.js";
import { AppState, PHI_PRESETS } from "./store.js";
import { Viewport } from "./viewport.js";

const POINT_LIMIT = 5000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const state = new AppState();
  const viewport = new Viewport();

  const scatterCanvas = el<HTMLCanvasElement>("scatter");
  const overlayCanvas = el<HTMLCanvasElement>("overlay");
  const container = el<HTMLDivElement>("canvas-wrap");

  const panel: PanelElements = {
    value: el("value"),
    ciLo: el("ci-lo"),
    ciHi: el("ci-hi"),
    bound: el("bound"),
    rowsRead: el("rows-read"),
    tilesSplit: el("tiles-split"),
    elapsed: el("elapsed"),
    error: el("error"),
    marker: el("ci-marker"),
    band: el("ci-band"),
  };
  const spark = el<HTMLElement>("sparkline");
  const aggLabel = el("agg-label");
  const windowLabel = el("window-label");

  const info = await api.dataset();
  viewport.setDomain(info.domain);
  state.attribute = info.tracked[0] ?? null;

  const aggSelect = el<HTMLSelectElement>("agg-func");
  const attrSelect = el<HTMLSelectElement>("agg-attr");
  for (const name of info.tracked) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    attrSelect.appendChild(opt);
  }

  async function refreshBackdrop(): Promise<void> {
    try {
      if (state.overlayPoints) {
        const pts = await api.points(viewport.rect, POINT_LIMIT);
        drawScatter(scatterCanvas.getContext("2d")!, pts, viewport);
      } else {
        scatterCanvas.getContext("2d")!.clearRect(0, 0, viewport.widthPx, viewport.heightPx);
      }
      const octx = overlayCanvas.getContext("2d")!;
      octx.clearRect(0, 0, viewport.widthPx, viewport.heightPx);
      if (state.overlayTiles) {
        const snapshot = await api.tiles();
        drawTileOverlay(octx, visibleTileRects(snapshot, viewport.rect), viewport);
      }
    } catch {
      // overlays are decorative; hide silently on fetch failure
      overlayCanvas.getContext("2d")!.clearRect(0, 0, viewport.widthPx, viewport.heightPx);
    }
  }

  function renderAll(): void {
    renderPanel(state, panel);
    spark.setAttribute("d", sparklinePath(state.history.map((h) => h.reportedBound), 160, 36));
    aggLabel.textContent = `${state.func}(${state.attribute ?? ""}) @ ${state.phi === null ? "exact" : `φ=${state.phi}`}`;
    const r = viewport.rect;
    windowLabel.textContent =
      `x ∈ [${r.xMin.toFixed(2)}, ${r.xMax.toFixed(2)}]  y ∈ [${r.yMin.toFixed(2)}, ${r.yMax.toFixed(2)}]`;
    void refreshBackdrop();
  }

  const controller = new QueryController(api, state, () => viewport.rect, new Debouncer(150), renderAll);

  function resize(): void {
    const w = container.clientWidth;
    const h = container.clientHeight;
    for (const canvas of [scatterCanvas, overlayCanvas]) {
      canvas.width = w;
      canvas.height = h;
    }
    viewport.setCanvasSize(w, h);
    renderAll();
  }
  window.addEventListener("resize", resize);

  // pan with pointer drag, zoom with wheel; every viewport change queries
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  overlayCanvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    overlayCanvas.setPointerCapture(e.pointerId);
  });
  overlayCanvas.addEventListener("pointermove", (e) => {
    if (!dragging) return;
    viewport.panPx(e.clientX - lastX, e.clientY - lastY);
    lastX = e.clientX;
    lastY = e.clientY;
    controller.viewportChanged();
    renderAll();
  });
  overlayCanvas.addEventListener("pointerup", (e) => {
    dragging = false;
    overlayCanvas.releasePointerCapture(e.pointerId);
  });
  overlayCanvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    const rect = overlayCanvas.getBoundingClientRect();
    viewport.zoom(e.deltaY < 0 ? 1.2 : 1 / 1.2, e.clientX - rect.left, e.clientY - rect.top);
    controller.viewportChanged();
    renderAll();
  });

  // accuracy presets plus free entry
  const phiGroup = el<HTMLDivElement>("phi-presets");
  const phiCustom = el<HTMLInputElement>("phi-custom");
  for (const preset of PHI_PRESETS) {
    const btn = document.createElement("button");
    btn.textContent = preset === null ? "exact" : `${preset * 100}%`;
    btn.addEventListener("click", () => {
      state.phi = preset;
      for (const other of phiGroup.querySelectorAll("button")) other.classList.remove("active");
      btn.classList.add("active");
      controller.settingsChanged();
    });
    if (preset === state.phi) btn.classList.add("active");
    phiGroup.appendChild(btn);
  }
  phiCustom.addEventListener("change", () => {
    const v = Number(phiCustom.value);
    if (Number.isFinite(v) && v >= 0) {
      state.phi = v;
      for (const other of phiGroup.querySelectorAll("button")) other.classList.remove("active");
      controller.settingsChanged();
    }
  });

  aggSelect.addEventListener("change", () => {
    state.func = aggSelect.value;
    controller.settingsChanged();
  });
  attrSelect.addEventListener("change", () => {
    state.attribute = attrSelect.value;
    controller.settingsChanged();
  });
  el<HTMLInputElement>("toggle-tiles").addEventListener("change", (e) => {
    state.overlayTiles = (e.target as HTMLInputElement).checked;
    renderAll();
  });
  el<HTMLInputElement>("toggle-points").addEventListener("change", (e) => {
    state.overlayPoints = (e.target as HTMLInputElement).checked;
    renderAll();
  });

  el("dataset-label").textContent = `${info.file} — ${info.rowCount.toLocaleString()} rows`;
  resize();
  await controller.flush();
}

void boot();
