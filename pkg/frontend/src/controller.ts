/** Orchestrates gestures: every interaction round-trips through the service
 * and lands in a render model; superseded in-flight requests are discarded by
 * sequence number. */

import {
  ApiClient, DatasetWire, DimCorrResponse, HistogramsResponse, LatestGate,
  NPResponse, ProjectionDetail, RankResponse, RepresentativeSummary,
  ShepardResponse,
} from "./api.js";
import {
  ViewState, initialViewState, resetFilters, setMappingChannel, setMode,
  withColorDimension, withPolyline, withSelection,
} from "./state.js";

export interface Documents {
  dataset: DatasetWire | null;
  projection: ProjectionDetail | null;
  representatives: RepresentativeSummary[];
  np: NPResponse | null;
  shepard: ShepardResponse | null;
  histograms: HistogramsResponse | null;
  dimcorr: DimCorrResponse | null;
  axes: import("./api.js").AxesResponse | null;
  ranking: RankResponse | null;
}

export class AppController {
  state: ViewState = initialViewState();
  docs: Documents = {
    dataset: null, projection: null, representatives: [], np: null,
    shepard: null, histograms: null, dimcorr: null, axes: null, ranking: null,
  };
  sessionId: string | null = null;

  private npGate = new LatestGate();
  private corrGate = new LatestGate();
  private axesGate = new LatestGate();
  private listeners: (() => void)[] = [];

  constructor(public api: ApiClient) {}

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  // ---- loading

  async openSession(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    const session = await this.api.getSession(sessionId);
    this.docs.dataset = await this.api.getDataset(session.dataset_id);
    const reps = await this.api.getRepresentatives(sessionId, "qma");
    this.docs.representatives = reps.representatives;
    const first = session.chosen_projection_id ?? reps.representatives[0]?.projection_id;
    if (first) await this.selectProjection(first);
    this.notify();
  }

  async selectProjection(projectionId: string): Promise<void> {
    this.docs.projection = await this.api.getProjection(projectionId);
    this.state = { ...resetFilters(this.state), projectionId };
    const [shepard, histograms, np] = await Promise.all([
      this.api.getShepard(projectionId, this.state.shepardMode === "heatmap" ? "heatmap" : "pairs"),
      this.api.getHistograms(projectionId),
      this.api.neighborhoodPreservation(projectionId, null, null, this.state.npVariant),
    ]);
    this.docs.shepard = shepard;
    this.docs.histograms = histograms;
    this.docs.np = np;
    this.docs.dimcorr = null;
    this.docs.axes = null;
    this.notify();
  }

  // ---- gestures

  /** Lasso completion: the index set refreshes the NP curve and the adaptive
   * PCP axes in one round-trip each. */
  async applyLasso(indices: number[]): Promise<void> {
    const pid = this.requireProjection();
    if (!indices.length) {
      this.state = withSelection(this.state, null);
      this.docs.np = await this.api.neighborhoodPreservation(pid, null, null, this.state.npVariant);
      this.docs.axes = null;
      this.notify();
      return;
    }
    this.state = withSelection(this.state, indices);
    const npTicket = this.npGate.next();
    const axTicket = this.axesGate.next();
    const [np, axes] = await Promise.all([
      this.api.neighborhoodPreservation(pid, indices, null, this.state.npVariant),
      this.api.adaptiveAxes(pid, indices),
    ]);
    if (this.npGate.isCurrent(npTicket)) this.docs.np = np;
    if (this.axesGate.isCurrent(axTicket)) this.docs.axes = axes;
    this.notify();
  }

  /** Polyline completion: dimension correlation along the drawn shape. */
  async applyPolyline(vertices: [number, number][], rho: number | null = null): Promise<void> {
    const pid = this.requireProjection();
    this.state = withPolyline(this.state, vertices);
    const ticket = this.corrGate.next();
    const resp = await this.api.dimensionCorrelation(
      pid, vertices, rho,
      this.state.correlationThreshold > 0 ? this.state.correlationThreshold : null);
    if (this.corrGate.isCurrent(ticket)) this.docs.dimcorr = resp;
    this.notify();
  }

  /** Bar click: recolor the main view by that dimension's values. */
  recolorByDimension(dimIndex: number | null): void {
    this.state = withColorDimension(this.state, dimIndex);
    this.notify();
  }

  /** The reset mode: one action clears lasso, polyline and recoloring and
   * drops their dependent views back to the global state. */
  async reset(): Promise<void> {
    const pid = this.state.projectionId;
    this.state = resetFilters(this.state);
    this.docs.dimcorr = null;
    this.docs.axes = null;
    if (pid) {
      this.docs.np = await this.api.neighborhoodPreservation(pid, null, null, this.state.npVariant);
    }
    this.notify();
  }

  /** "Optimize selection": re-rank the representatives for the live lasso. */
  async optimizeSelection(metric = "qma"): Promise<RankResponse> {
    if (!this.sessionId) throw new Error("no session open");
    const ranking = await this.api.rankRepresentatives(
      this.sessionId, metric, this.state.selection, 6);
    this.docs.ranking = ranking;
    this.notify();
    return ranking;
  }

  async annotate(text: string, author = "analyst"): Promise<void> {
    if (!this.sessionId) throw new Error("no session open");
    await this.api.annotate(this.sessionId, author, text, this.state.selection);
  }

  async setNpVariant(variant: ViewState["npVariant"]): Promise<void> {
    this.state = { ...this.state, npVariant: variant };
    const pid = this.requireProjection();
    this.docs.np = await this.api.neighborhoodPreservation(
      pid, this.state.selection, null, variant);
    this.notify();
  }

  async setShepardMode(mode: ViewState["shepardMode"]): Promise<void> {
    this.state = { ...this.state, shepardMode: mode };
    const pid = this.requireProjection();
    this.docs.shepard = await this.api.getShepard(
      pid, mode === "heatmap" ? "heatmap" : "pairs");
    this.notify();
  }

  async setCorrelationThreshold(threshold: number): Promise<void> {
    this.state = { ...this.state, correlationThreshold: threshold };
    if (this.state.polyline) {
      await this.applyPolyline(this.state.polyline);
    } else {
      this.notify();
    }
  }

  setMappingChannel(target: "density" | "cost", channel: "color" | "size"): void {
    this.state = setMappingChannel(this.state, target, channel);
    this.notify();
  }

  setInteractionMode(mode: ViewState["mode"]): void {
    this.state = setMode(this.state, mode);
    this.notify();
  }

  private requireProjection(): string {
    if (!this.state.projectionId) throw new Error("no projection selected");
    return this.state.projectionId;
  }
}
