/** View state: one active interaction mode, a visual mapping that keeps
 * density and cost on distinct channels, and the transient filters (lasso
 * selection, polyline, dimension recoloring) that reset clears in one action.
 */

export type InteractionMode = "explore" | "lasso" | "polyline";
export type Channel = "color" | "size";
export type NPVariant = "bar" | "diff-bar" | "line" | "diff-line";
export type ShepardMode = "heatmap" | "diagram";

export interface VisualMapping {
  density: Channel;
  cost: Channel;
}

export interface ViewState {
  mode: InteractionMode;
  mapping: VisualMapping;
  projectionId: string | null;
  npVariant: NPVariant;
  shepardMode: ShepardMode;
  correlationThreshold: number;
  selection: number[] | null;
  polyline: [number, number][] | null;
  colorDimension: number | null;
}

export function initialViewState(): ViewState {
  return {
    mode: "explore",
    mapping: { density: "color", cost: "size" },
    projectionId: null,
    npVariant: "bar",
    shepardMode: "heatmap",
    correlationThreshold: 0,
    selection: null,
    polyline: null,
    colorDimension: null,
  };
}

export function assertMappingValid(mapping: VisualMapping): void {
  if (mapping.density === mapping.cost) {
    throw new Error("density and cost must map to distinct channels");
  }
}

/** Assigning one quantity to a channel pushes the other to the free channel. */
export function setMappingChannel(state: ViewState, target: "density" | "cost",
                                  channel: Channel): ViewState {
  const other: Channel = channel === "color" ? "size" : "color";
  const mapping: VisualMapping = target === "density"
    ? { density: channel, cost: other }
    : { density: other, cost: channel };
  assertMappingValid(mapping);
  return { ...state, mapping };
}

export function setMode(state: ViewState, mode: InteractionMode): ViewState {
  return { ...state, mode };
}

/** The reset action: clears lasso, polyline and dimension recoloring at once
 * and returns to the exploration mode. Display preferences survive. */
export function resetFilters(state: ViewState): ViewState {
  return {
    ...state,
    mode: "explore",
    selection: null,
    polyline: null,
    colorDimension: null,
  };
}

export function withSelection(state: ViewState, indices: number[] | null): ViewState {
  return { ...state, selection: indices && indices.length ? [...indices] : null };
}

export function withPolyline(state: ViewState, polyline: [number, number][] | null): ViewState {
  return { ...state, polyline };
}

export function withColorDimension(state: ViewState, dim: number | null): ViewState {
  return { ...state, colorDimension: dim };
}
