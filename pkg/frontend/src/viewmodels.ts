/** Pure builders from API responses to render models.
 *
 * The UI computes no metrics of its own: every number a view shows is copied
 * from exactly one API response, which is what the parity snapshot tests
 * assert on these models.
 */

import {
  AxesResponse, DatasetWire, DimCorrResponse, HistogramsResponse, NPResponse,
  ProjectionDetail, RepresentativeSummary, ShepardResponse, decodeCoords,
  decodeFloats,
} from "./api.js";
import { NPVariant, ViewState } from "./state.js";

export interface NPBar {
  k: number;
  value: number;
  /** present only for selection-aware variants */
  selectionValue: number | null;
}

export interface NPChartModel {
  variant: NPVariant;
  /** bar/line: absolute NP values; diff-*: the API's selection-global diffs */
  bars: NPBar[];
  yDomain: [number, number];
  hasSelection: boolean;
}

export function npChartModel(resp: NPResponse, variant: NPVariant): NPChartModel {
  const hasSelection = resp.selection != null;
  const diffMode = variant.startsWith("diff");
  const bars: NPBar[] = resp.k_values.map((k, i) => {
    if (diffMode) {
      return { k, value: resp.diff ? resp.diff[i] : 0, selectionValue: null };
    }
    return {
      k,
      value: resp.global[i],
      selectionValue: hasSelection ? resp.selection![i] : null,
    };
  });
  return {
    variant,
    bars,
    yDomain: diffMode ? [-1, 1] : [0, 1],
    hasSelection,
  };
}

export interface CorrBar {
  index: number;
  name: string;
  rho: number;
  magnitude: number;
}

export interface CorrBarsModel {
  bars: CorrBar[];
  captured: number[];
}

/** Signed horizontal bars, already sorted by relevance by the server. */
export function corrBarsModel(resp: DimCorrResponse): CorrBarsModel {
  return {
    bars: resp.dimensions.map((d) => ({
      index: d.index,
      name: d.name,
      rho: d.rho,
      magnitude: Math.abs(d.rho),
    })),
    captured: resp.captured,
  };
}

export interface RepresentativeCell {
  projectionId: string;
  points: [number, number][];
  /** grayscale mini-heatmap values in fixed metric order */
  metricCells: { metric: string; value: number | null }[];
  qma: number | null;
}

export const METRIC_ORDER = ["nh", "t", "c", "s", "sdc", "qma"] as const;

export function representativeGridModel(reps: RepresentativeSummary[]): RepresentativeCell[] {
  return reps.map((r) => ({
    projectionId: r.projection_id,
    points: r.preview.points,
    metricCells: METRIC_ORDER.map((m) => ({
      metric: m,
      value: r.scores ? r.scores[m] : null,
    })),
    qma: r.scores ? r.scores.qma : null,
  }));
}

export interface ShepardHeatmapModel {
  kind: "heatmap";
  bins: number;
  /** row-major, row 0 = smallest high-D distances (origin top-left) */
  intensities: number[][];
  counts: number[][];
}

export interface ShepardDiagramModel {
  kind: "diagram";
  pairs: [number, number][];
}

export function shepardModel(resp: ShepardResponse): ShepardHeatmapModel | ShepardDiagramModel {
  if (resp.mode === "heatmap") {
    const counts = resp.counts!;
    let max = 0;
    for (const row of counts) for (const v of row) max = Math.max(max, v);
    return {
      kind: "heatmap",
      bins: resp.bins!,
      counts,
      intensities: counts.map((row) => row.map((v) => (max ? v / max : 0))),
    };
  }
  return { kind: "diagram", pairs: resp.pairs ?? [] };
}

export interface HistogramModel {
  edges: number[];
  counts: number[];
}

export function histogramModels(resp: HistogramsResponse): {
  density: HistogramModel; cost: HistogramModel;
} {
  return {
    density: { edges: resp.density.edges, counts: resp.density.counts },
    cost: { edges: resp.cost.edges, counts: resp.cost.counts },
  };
}

export interface ScatterPointModel {
  x: number;
  y: number;
  /** 0..1 position in the active color ramp */
  colorT: number;
  /** 0..1 relative marker size */
  sizeT: number;
  selected: boolean;
}

export interface ScatterModel {
  points: ScatterPointModel[];
  colorSource: "density" | "cost" | "dimension";
  colorDimensionName: string | null;
}

function normalized(values: Float64Array | number[]): number[] {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const span = hi - lo || 1;
  const out = new Array(values.length);
  for (let i = 0; i < values.length; i++) out[i] = (values[i] - lo) / span;
  return out;
}

/** Main-view points: positions plus normalized color/size driver values per
 * the active mapping (density/cost, or a clicked dimension's raw values). */
export function scatterModel(detail: ProjectionDetail, dataset: DatasetWire,
                             state: ViewState): ScatterModel {
  const coords = decodeCoords(detail.embedding, detail.n);
  const density = decodeFloats(detail.instrumentation.density);
  const cost = decodeFloats(detail.instrumentation.point_cost);

  let colorValues: number[];
  let colorSource: ScatterModel["colorSource"];
  let colorDimensionName: string | null = null;
  if (state.colorDimension != null) {
    const values = decodeFloats(dataset.values);
    colorValues = new Array(detail.n);
    for (let i = 0; i < detail.n; i++) {
      colorValues[i] = values[i * dataset.d + state.colorDimension];
    }
    colorSource = "dimension";
    colorDimensionName = dataset.dim_names[state.colorDimension];
  } else if (state.mapping.density === "color") {
    colorValues = Array.from(density);
    colorSource = "density";
  } else {
    colorValues = Array.from(cost);
    colorSource = "cost";
  }
  const sizeValues = state.mapping.cost === "size" ? cost : density;

  const colorT = normalized(colorValues);
  const sizeT = normalized(sizeValues);
  const selected = new Set(state.selection ?? []);
  return {
    colorSource,
    colorDimensionName,
    points: coords.map(([x, y], i) => ({
      x, y,
      colorT: colorT[i],
      sizeT: sizeT[i],
      selected: selected.size === 0 || selected.has(i),
    })),
  };
}

export interface OverviewModel {
  points: { x: number; y: number; labelIndex: number }[];
  labelNames: string[];
}

/** The static context view: projection positions colored by label only.
 * Depends solely on the embedding and the dataset labels, never on filters.
 */
export function overviewModel(detail: ProjectionDetail, dataset: DatasetWire): OverviewModel {
  const coords = decodeCoords(detail.embedding, detail.n);
  const labels = dataset.labels;
  const names: string[] = [];
  const lookup = new Map<string, number>();
  const points = coords.map(([x, y], i) => {
    let labelIndex = 0;
    if (labels) {
      const lab = labels[i];
      if (!lookup.has(lab)) {
        lookup.set(lab, names.length);
        names.push(lab);
      }
      labelIndex = lookup.get(lab)!;
    }
    return { x, y, labelIndex };
  });
  return { points, labelNames: labels ? names : [] };
}

export interface PcpAxisModel {
  index: number;
  name: string;
  weight: number;
  min: number;
  max: number;
}

export interface PcpModel {
  axes: PcpAxisModel[];
  /** per point: normalized [0,1] value per shown axis */
  lines: { values: number[]; selected: boolean; labelIndex: number }[];
}

/** Adaptive parallel coordinates: the server-chosen axes (<= 8, importance
 * order), every axis spanning its dimension's full range; non-selected lines
 * render with high transparency. */
export function pcpModel(axesResp: AxesResponse, dataset: DatasetWire,
                         selection: number[] | null, labels: string[] | null): PcpModel {
  const values = decodeFloats(dataset.values);
  const axes: PcpAxisModel[] = axesResp.axes.map((a) => {
    let lo = Infinity, hi = -Infinity;
    for (let i = 0; i < dataset.n; i++) {
      const v = values[i * dataset.d + a.index];
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
    return { index: a.index, name: a.name, weight: a.weight, min: lo, max: hi };
  });
  const selectedSet = new Set(selection ?? []);
  const names = new Map<string, number>();
  const lines = [];
  for (let i = 0; i < dataset.n; i++) {
    const vals = axes.map((a) => {
      const v = values[i * dataset.d + a.index];
      const span = a.max - a.min || 1;
      return (v - a.min) / span;
    });
    let labelIndex = 0;
    if (labels) {
      const lab = labels[i];
      if (!names.has(lab)) names.set(lab, names.size);
      labelIndex = names.get(lab)!;
    }
    lines.push({ values: vals, selected: selectedSet.has(i), labelIndex });
  }
  return { axes, lines };
}
