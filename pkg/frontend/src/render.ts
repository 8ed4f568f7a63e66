/** Canvas renderers. Each takes a 2D context and a render model; they draw
 * and nothing else, so tests can replay them against a recording context. */

import { categoricalColor, multiHue, singleHue, withAlpha } from "./colors.js";
import { scaleLinear } from "./geometry.js";
import {
  CorrBarsModel, HistogramModel, NPChartModel, OverviewModel, PcpModel,
  RepresentativeCell, ScatterModel, ShepardDiagramModel, ShepardHeatmapModel,
} from "./viewmodels.js";

export interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  if (!isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

const PAD = 8;

export function renderScatter(ctx: Canvas2D, model: ScatterModel, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  const xs = model.points.map((p) => p.x);
  const ys = model.points.map((p) => p.y);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = scaleLinear(x0, x1, PAD, w - PAD);
  const sy = scaleLinear(y0, y1, h - PAD, PAD);
  for (const p of model.points) {
    const r = 1.5 + 4.5 * p.sizeT;
    ctx.globalAlpha = p.selected ? 0.9 : 0.15;
    ctx.fillStyle = multiHue(p.colorT);
    ctx.beginPath();
    ctx.arc(sx(p.x), sy(p.y), r, 0, Math.PI * 2);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
}

export function renderOverview(ctx: Canvas2D, model: OverviewModel, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  const xs = model.points.map((p) => p.x);
  const ys = model.points.map((p) => p.y);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = scaleLinear(x0, x1, PAD, w - PAD);
  const sy = scaleLinear(y0, y1, h - PAD, PAD);
  for (const p of model.points) {
    ctx.fillStyle = model.labelNames.length
      ? categoricalColor(p.labelIndex) : "#555555";
    ctx.beginPath();
    ctx.arc(sx(p.x), sy(p.y), 2, 0, Math.PI * 2);
    ctx.fill();
  }
  let ly = 14;
  ctx.font = "11px sans-serif";
  for (let i = 0; i < model.labelNames.length; i++) {
    ctx.fillStyle = categoricalColor(i);
    ctx.fillRect(6, ly - 8, 8, 8);
    ctx.fillStyle = "#333333";
    ctx.fillText(model.labelNames[i], 18, ly);
    ly += 14;
  }
}

export function renderShepardHeatmap(ctx: Canvas2D, model: ShepardHeatmapModel,
                                     w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  const cw = w / model.bins;
  const ch = h / model.bins;
  for (let row = 0; row < model.bins; row++) {
    for (let col = 0; col < model.bins; col++) {
      ctx.fillStyle = singleHue(model.intensities[row][col]);
      // origin top-left: row 0 (smallest high-D distances) at the top
      ctx.fillRect(col * cw, row * ch, cw + 0.5, ch + 0.5);
    }
  }
}

export function renderShepardDiagram(ctx: Canvas2D, model: ShepardDiagramModel,
                                     w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = withAlpha("#2171b5", 0.35);
  for (const [x, y] of model.pairs) {
    ctx.beginPath();
    // x: 2-D distance rightward, y: high-D distance downward from top-left
    ctx.arc(x * (w - 2 * PAD) + PAD, y * (h - 2 * PAD) + PAD, 1.5, 0, Math.PI * 2);
    ctx.fill();
  }
}

export function renderHistogram(ctx: Canvas2D, model: HistogramModel, w: number, h: number,
                                color: string, logY = false): void {
  ctx.clearRect(0, 0, w, h);
  const counts = model.counts;
  const y = (c: number) => (logY ? Math.log1p(c) : c);
  const maxC = Math.max(...counts.map(y), 1);
  const bw = w / counts.length;
  ctx.fillStyle = color;
  for (let i = 0; i < counts.length; i++) {
    const bh = (y(counts[i]) / maxC) * (h - PAD);
    ctx.fillRect(i * bw + 1, h - bh, bw - 2, bh);
  }
}

export function renderNPChart(ctx: Canvas2D, model: NPChartModel, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  const n = model.bars.length;
  if (!n) return;
  const bw = w / n;
  const [lo, hi] = model.yDomain;
  const sy = scaleLinear(lo, hi, h - PAD, PAD);
  const zero = sy(0);
  const line = model.variant === "line" || model.variant === "diff-line";
  if (!line) {
    for (let i = 0; i < n; i++) {
      const bar = model.bars[i];
      ctx.fillStyle = "#222222";
      const y = sy(bar.value);
      ctx.fillRect(i * bw + 1, Math.min(y, zero),
                   Math.max(1, bw / (bar.selectionValue != null ? 2 : 1) - 2),
                   Math.abs(zero - y) || 1);
      if (bar.selectionValue != null) {
        ctx.fillStyle = "#999999";
        const ys = sy(bar.selectionValue);
        ctx.fillRect(i * bw + bw / 2, Math.min(ys, zero), Math.max(1, bw / 2 - 2),
                     Math.abs(zero - ys) || 1);
      }
    }
  } else {
    const series: [number[], string][] = [[model.bars.map((b) => b.value), "#222222"]];
    if (model.bars[0].selectionValue != null) {
      series.push([model.bars.map((b) => b.selectionValue!), "#999999"]);
    }
    for (const [values, color] of series) {
      ctx.strokeStyle = color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      values.forEach((v, i) => {
        const x = i * bw + bw / 2;
        if (i === 0) ctx.moveTo(x, sy(v));
        else ctx.lineTo(x, sy(v));
      });
      ctx.stroke();
    }
  }
  if (model.variant.startsWith("diff")) {
    ctx.strokeStyle = "#bbbbbb";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(0, zero);
    ctx.lineTo(w, zero);
    ctx.stroke();
  }
}

export function renderCorrBars(ctx: Canvas2D, model: CorrBarsModel, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  const rowH = Math.min(22, h / Math.max(model.bars.length, 1));
  const mid = w * 0.55;
  const half = w * 0.4;
  ctx.font = "11px sans-serif";
  model.bars.forEach((bar, i) => {
    const y = i * rowH;
    ctx.fillStyle = "#333333";
    ctx.fillText(bar.name, 4, y + rowH * 0.7);
    // signed value drawn from the central axis, negative to the left
    ctx.fillStyle = bar.rho >= 0 ? "#2171b5" : "#d95f02";
    const len = half * bar.magnitude;
    ctx.fillRect(bar.rho >= 0 ? mid : mid - len, y + rowH * 0.2, Math.max(len, 0.5), rowH * 0.6);
  });
  ctx.strokeStyle = "#888888";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(mid, 0);
  ctx.lineTo(mid, Math.max(model.bars.length, 1) * rowH);
  ctx.stroke();
}

export function renderPcp(ctx: Canvas2D, model: PcpModel, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  const nAxes = model.axes.length;
  if (nAxes < 2) return;
  const x = (a: number) => PAD + (a / (nAxes - 1)) * (w - 2 * PAD);
  const y = (t: number) => h - PAD - t * (h - 2 * PAD - 12);
  for (const line of model.lines) {
    // unselected context lines stay visible but highly transparent
    ctx.globalAlpha = line.selected ? 0.85 : 0.05;
    ctx.strokeStyle = categoricalColor(line.labelIndex);
    ctx.lineWidth = 1;
    ctx.beginPath();
    line.values.forEach((v, a) => {
      if (a === 0) ctx.moveTo(x(a), y(v));
      else ctx.lineTo(x(a), y(v));
    });
    ctx.stroke();
  }
  ctx.globalAlpha = 1;
  ctx.font = "10px sans-serif";
  model.axes.forEach((axis, a) => {
    ctx.strokeStyle = "#777777";
    ctx.beginPath();
    ctx.moveTo(x(a), y(0));
    ctx.lineTo(x(a), y(1));
    ctx.stroke();
    ctx.fillStyle = "#333333";
    ctx.fillText(axis.name, Math.max(0, x(a) - 20), h - 2);
  });
}

export function renderRepresentativeThumb(ctx: Canvas2D, cell: RepresentativeCell,
                                          w: number, h: number, active: boolean): void {
  ctx.clearRect(0, 0, w, h);
  const plotH = h - 12;
  const xs = cell.points.map((p) => p[0]);
  const ys = cell.points.map((p) => p[1]);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = scaleLinear(x0, x1, 3, w - 3);
  const sy = scaleLinear(y0, y1, plotH - 3, 3);
  ctx.fillStyle = "#444444";
  for (const [px, py] of cell.points) {
    ctx.fillRect(sx(px), sy(py), 1.5, 1.5);
  }
  // six-metric mini-heatmap strip in grayscale
  const cw = w / cell.metricCells.length;
  cell.metricCells.forEach((mc, i) => {
    const v = mc.value;
    const shade = v == null ? 255 : Math.round(255 * (1 - v));
    ctx.fillStyle = v == null ? "#ffffff" : `rgb(${shade},${shade},${shade})`;
    ctx.fillRect(i * cw, plotH, cw, 12);
  });
  ctx.strokeStyle = active ? "#d62728" : "#cccccc";
  ctx.lineWidth = active ? 2 : 1;
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
}
