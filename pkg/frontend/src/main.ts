/** Browser bootstrap: builds the coordinated views over the JSON API and
 * routes every gesture through the controller. */

import { ApiClient } from "./api.js";
import { AppController } from "./controller.js";
import { Quadtree, lassoSelect, scaleLinear } from "./geometry.js";
import {
  corrBarsModel, histogramModels, npChartModel, overviewModel, pcpModel,
  representativeGridModel, scatterModel, shepardModel,
} from "./viewmodels.js";
import {
  renderCorrBars, renderHistogram, renderNPChart, renderOverview, renderPcp,
  renderRepresentativeThumb, renderScatter, renderShepardDiagram,
  renderShepardHeatmap,
} from "./render.js";

const api = new ApiClient("");
const app = new AppController(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function canvas(id: string): [HTMLCanvasElement, CanvasRenderingContext2D] {
  const c = el<HTMLCanvasElement>(id);
  return [c, c.getContext("2d")!];
}

const [mainCanvas, mainCtx] = canvas("main-view");
const [overviewCanvas, overviewCtx] = canvas("overview");
const [shepardCanvas, shepardCtx] = canvas("shepard");
const [densityCanvas, densityCtx] = canvas("hist-density");
const [costCanvas, costCtx] = canvas("hist-cost");
const [npCanvas, npCtx] = canvas("np-chart");
const [corrCanvas, corrCtx] = canvas("corr-bars");
const [pcpCanvas, pcpCtx] = canvas("pcp");

const status = el<HTMLDivElement>("status");
const banner = el<HTMLDivElement>("banner");

function toast(message: string): void {
  banner.textContent = message;
  banner.classList.add("visible");
  setTimeout(() => banner.classList.remove("visible"), 5000);
}

function busy(message: string | null): void {
  status.textContent = message ?? "";
}

// ---- gesture capture state (screen space)

let lassoPath: [number, number][] = [];
let polylinePath: [number, number][] = [];
let dragging = false;
let hovered = -1;
let quadtree: Quadtree | null = null;
let screenPoints: [number, number][] = [];

function dataToScreen(): { sx: (v: number) => number; sy: (v: number) => number } | null {
  if (!app.docs.projection || !app.docs.dataset) return null;
  const model = scatterModel(app.docs.projection, app.docs.dataset, app.state);
  const xs = model.points.map((p) => p.x);
  const ys = model.points.map((p) => p.y);
  const sx = scaleLinear(Math.min(...xs), Math.max(...xs), 8, mainCanvas.width - 8);
  const sy = scaleLinear(Math.min(...ys), Math.max(...ys), mainCanvas.height - 8, 8);
  return { sx, sy };
}

function screenToData(px: number, py: number): [number, number] {
  const t = dataToScreen()!;
  const sx = t.sx as unknown as { invert(v: number): number };
  const sy = t.sy as unknown as { invert(v: number): number };
  return [sx.invert(px), sy.invert(py)];
}

// ---- rendering

function renderAll(): void {
  const { projection, dataset } = app.docs;
  if (!projection || !dataset) return;

  const scatter = scatterModel(projection, dataset, app.state);
  renderScatter(mainCtx, scatter, mainCanvas.width, mainCanvas.height);
  drawGestureOverlay();
  rebuildHitIndex(scatter);

  renderOverview(overviewCtx, overviewModel(projection, dataset),
                 overviewCanvas.width, overviewCanvas.height);

  if (app.docs.shepard) {
    const model = shepardModel(app.docs.shepard);
    if (model.kind === "heatmap") {
      renderShepardHeatmap(shepardCtx, model, shepardCanvas.width, shepardCanvas.height);
    } else {
      renderShepardDiagram(shepardCtx, model, shepardCanvas.width, shepardCanvas.height);
    }
  }
  if (app.docs.histograms) {
    const h = histogramModels(app.docs.histograms);
    renderHistogram(densityCtx, h.density, densityCanvas.width, densityCanvas.height, "#5ec962");
    renderHistogram(costCtx, h.cost, costCanvas.width, costCanvas.height, "#3b528b", true);
  }
  if (app.docs.np) {
    renderNPChart(npCtx, npChartModel(app.docs.np, app.state.npVariant),
                  npCanvas.width, npCanvas.height);
  } else {
    npCtx.clearRect(0, 0, npCanvas.width, npCanvas.height);
  }
  if (app.docs.dimcorr) {
    renderCorrBars(corrCtx, corrBarsModel(app.docs.dimcorr),
                   corrCanvas.width, corrCanvas.height);
  } else {
    corrCtx.clearRect(0, 0, corrCanvas.width, corrCanvas.height);
  }
  if (app.docs.axes) {
    renderPcp(pcpCtx, pcpModel(app.docs.axes, dataset, app.state.selection, dataset.labels),
              pcpCanvas.width, pcpCanvas.height);
  } else {
    pcpCtx.clearRect(0, 0, pcpCanvas.width, pcpCanvas.height);
  }
  renderRepresentatives();
  el<HTMLSpanElement>("proj-label").textContent = app.state.projectionId ?? "";
}

function drawGestureOverlay(): void {
  const path = app.state.mode === "lasso" ? lassoPath : polylinePath;
  if (path.length < 2) return;
  mainCtx.strokeStyle = app.state.mode === "lasso" ? "#d62728" : "#1f77b4";
  mainCtx.lineWidth = 1.5;
  mainCtx.beginPath();
  path.forEach(([x, y], i) => (i ? mainCtx.lineTo(x, y) : mainCtx.moveTo(x, y)));
  if (app.state.mode === "lasso") mainCtx.closePath();
  mainCtx.stroke();
}

function rebuildHitIndex(scatter: ReturnType<typeof scatterModel>): void {
  const t = dataToScreen();
  if (!t) return;
  screenPoints = scatter.points.map((p) => [t.sx(p.x), t.sy(p.y)] as [number, number]);
  quadtree = new Quadtree(screenPoints);
}

function renderRepresentatives(): void {
  const host = el<HTMLDivElement>("representatives");
  host.innerHTML = "";
  const cells = representativeGridModel(app.docs.representatives);
  for (const cell of cells) {
    const c = document.createElement("canvas");
    c.width = 110;
    c.height = 96;
    c.title = cell.projectionId;
    c.addEventListener("click", () => {
      busy("loading projection...");
      app.selectProjection(cell.projectionId)
        .catch((e) => toast(String(e)))
        .finally(() => busy(null));
    });
    renderRepresentativeThumb(c.getContext("2d")!, cell, c.width, c.height,
                              cell.projectionId === app.state.projectionId);
    host.appendChild(c);
  }
}

// ---- main-view interactions

mainCanvas.addEventListener("mousedown", (ev) => {
  const pos: [number, number] = [ev.offsetX, ev.offsetY];
  if (app.state.mode === "lasso") {
    dragging = true;
    lassoPath = [pos];
  } else if (app.state.mode === "polyline") {
    polylinePath.push(pos);
    renderAll();
  }
});

mainCanvas.addEventListener("mousemove", (ev) => {
  if (app.state.mode === "lasso" && dragging) {
    lassoPath.push([ev.offsetX, ev.offsetY]);
    renderAll();
    return;
  }
  if (app.state.mode === "explore" && quadtree) {
    const hit = quadtree.nearest(ev.offsetX, ev.offsetY, 8);
    if (hit !== hovered) {
      hovered = hit;
      const tip = el<HTMLDivElement>("tooltip");
      if (hit >= 0 && app.docs.dataset) {
        tip.style.left = `${ev.offsetX + 12}px`;
        tip.style.top = `${ev.offsetY + 12}px`;
        const label = app.docs.dataset.labels ? ` (${app.docs.dataset.labels[hit]})` : "";
        tip.textContent = `#${hit}${label}`;
        tip.classList.add("visible");
      } else {
        tip.classList.remove("visible");
      }
    }
  }
});

mainCanvas.addEventListener("mouseup", () => {
  if (app.state.mode === "lasso" && dragging) {
    dragging = false;
    const polygon = lassoPath.map(([x, y]) => screenToData(x, y));
    lassoPath = [];
    if (!app.docs.projection || !app.docs.dataset) return;
    const model = scatterModel(app.docs.projection, app.docs.dataset, app.state);
    const coords = model.points.map((p) => [p.x, p.y] as [number, number]);
    const indices = lassoSelect(coords, polygon);
    busy("updating selection views...");
    app.applyLasso(indices).catch((e) => toast(String(e))).finally(() => busy(null));
  }
});

mainCanvas.addEventListener("dblclick", () => {
  if (app.state.mode === "polyline" && polylinePath.length >= 2) {
    const vertices = polylinePath.map(([x, y]) => screenToData(x, y));
    polylinePath = [];
    busy("computing dimension correlation...");
    app.applyPolyline(vertices).catch((e) => toast(String(e))).finally(() => busy(null));
  }
});

corrCanvas.addEventListener("click", (ev) => {
  if (!app.docs.dimcorr) return;
  const bars = corrBarsModel(app.docs.dimcorr).bars;
  const rowH = Math.min(22, corrCanvas.height / Math.max(bars.length, 1));
  const idx = Math.floor(ev.offsetY / rowH);
  if (idx >= 0 && idx < bars.length) {
    app.recolorByDimension(bars[idx].index);
  }
});

// ---- controls

for (const mode of ["explore", "lasso", "polyline"] as const) {
  el<HTMLButtonElement>(`mode-${mode}`).addEventListener("click", () => {
    lassoPath = [];
    polylinePath = [];
    app.setInteractionMode(mode);
  });
}
el<HTMLButtonElement>("mode-reset").addEventListener("click", () => {
  lassoPath = [];
  polylinePath = [];
  app.reset().catch((e) => toast(String(e)));
});

el<HTMLSelectElement>("np-variant").addEventListener("change", (ev) => {
  const v = (ev.target as HTMLSelectElement).value as never;
  app.setNpVariant(v).catch((e) => toast(String(e)));
});

el<HTMLSelectElement>("shepard-mode").addEventListener("change", (ev) => {
  const v = (ev.target as HTMLSelectElement).value as never;
  app.setShepardMode(v).catch((e) => toast(String(e)));
});

el<HTMLInputElement>("corr-threshold").addEventListener("change", (ev) => {
  const v = parseFloat((ev.target as HTMLInputElement).value) / 100;
  app.setCorrelationThreshold(v).catch((e) => toast(String(e)));
});

el<HTMLSelectElement>("mapping-color").addEventListener("change", (ev) => {
  const quantity = (ev.target as HTMLSelectElement).value as "density" | "cost";
  app.setMappingChannel(quantity, "color");
});

el<HTMLSelectElement>("rank-metric").addEventListener("change", () => refreshRepresentatives());
el<HTMLButtonElement>("optimize-selection").addEventListener("click", () => {
  const metric = el<HTMLSelectElement>("rank-metric").value;
  busy("ranking representatives for the selection...");
  app.optimizeSelection(metric)
    .then((ranking) => {
      toast(`top for selection: ${ranking.ids.map((i) => i.split(":")[1]).join(", ")}`);
      const first = ranking.ids[0];
      if (first) return app.selectProjection(first);
      return undefined;
    })
    .catch((e) => toast(String(e)))
    .finally(() => busy(null));
});

el<HTMLButtonElement>("annotate").addEventListener("click", () => {
  const input = el<HTMLInputElement>("annotation-text");
  if (!input.value.trim()) return;
  app.annotate(input.value.trim())
    .then(() => {
      input.value = "";
      toast("annotation saved");
    })
    .catch((e) => toast(String(e)));
});

async function refreshRepresentatives(): Promise<void> {
  if (!app.sessionId) return;
  const metric = el<HTMLSelectElement>("rank-metric").value;
  const reps = await api.getRepresentatives(app.sessionId, metric);
  app.docs.representatives = reps.representatives;
  renderAll();
}

// ---- setup panel

el<HTMLButtonElement>("upload").addEventListener("click", async () => {
  try {
    const file = el<HTMLInputElement>("csv-file").files?.[0];
    if (!file) return toast("choose a CSV file first");
    busy("uploading dataset...");
    const labelCol = el<HTMLInputElement>("label-column").value.trim() || undefined;
    const ds = await api.uploadDataset(await file.text(), labelCol);
    const session = await api.createSession(ds.dataset_id);
    app.sessionId = session.session_id;
    el<HTMLSpanElement>("session-label").textContent = session.session_id;
    toast(`dataset ${ds.n} x ${ds.d} ready; session ${session.session_id}`);
  } catch (e) {
    toast(String(e));
  } finally {
    busy(null);
  }
});

el<HTMLButtonElement>("start-grid").addEventListener("click", async () => {
  if (!app.sessionId) return toast("upload a dataset first");
  try {
    busy("grid search running...");
    const { job_id } = await api.startGridSearch(app.sessionId, { parallelism: 4 });
    for (;;) {
      const job = await api.getJob(job_id);
      busy(`grid search: ${(job.progress * 100).toFixed(0)}%`);
      if (job.status === "failed") throw new Error(job.error ?? "grid search failed");
      if (job.status === "done") break;
      await new Promise((r) => setTimeout(r, 500));
    }
    await app.openSession(app.sessionId);
  } catch (e) {
    toast(String(e));
  } finally {
    busy(null);
  }
});

el<HTMLButtonElement>("single-run").addEventListener("click", async () => {
  if (!app.sessionId) return toast("upload a dataset first");
  try {
    busy("running projection...");
    await api.runSingle(app.sessionId, {
      perplexity: parseFloat(el<HTMLInputElement>("perplexity").value),
      learning_rate: parseFloat(el<HTMLInputElement>("learning-rate").value),
      max_iterations: parseInt(el<HTMLInputElement>("iterations").value, 10),
      seed: parseInt(el<HTMLInputElement>("seed").value, 10),
    });
    await app.openSession(app.sessionId);
  } catch (e) {
    toast(String(e));
  } finally {
    busy(null);
  }
});

el<HTMLButtonElement>("open-session").addEventListener("click", async () => {
  const sid = el<HTMLInputElement>("session-id").value.trim();
  if (!sid) return;
  try {
    busy("loading session...");
    await app.openSession(sid);
    el<HTMLSpanElement>("session-label").textContent = sid;
  } catch (e) {
    toast(String(e));
  } finally {
    busy(null);
  }
});

app.onChange(renderAll);
