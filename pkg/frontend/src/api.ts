/** Typed client for the projection-assessment JSON API.
 *
 * Float arrays arrive base64-encoded (little-endian f64) and are decoded
 * here; every displayed number in the UI is traceable to one of these
 * responses.
 */

export interface QualityScores {
  nh: number | null;
  t: number;
  c: number;
  s: number;
  sdc: number;
  qma: number;
}

export interface TsneParams {
  perplexity: number;
  learning_rate: number;
  max_iterations: number;
  theta: number;
  seed: number;
}

export interface Preview {
  n: number;
  stride: number;
  points: [number, number][];
}

export interface RepresentativeSummary {
  projection_id: string;
  record_id: number;
  params: TsneParams;
  scores: QualityScores | null;
  preview: Preview;
}

export interface RepresentativesResponse {
  session_id: string;
  metric: string;
  representatives: RepresentativeSummary[];
}

export interface ProjectionDetail {
  projection_id: string;
  session_id: string;
  id: number;
  n: number;
  params: TsneParams;
  embedding: string;
  instrumentation: {
    sigma: string;
    density: string;
    point_cost: string;
    total_cost: number;
  };
  scores: QualityScores | null;
}

export interface NPResponse {
  projection_id: string;
  variant: string;
  k_values: number[];
  global: number[];
  selection: number[] | null;
  diff: number[] | null;
}

export interface DimensionEntry {
  index: number;
  name: string;
  rho: number;
}

export interface DimCorrResponse {
  projection_id: string;
  rho: number;
  captured: number[];
  dimensions: DimensionEntry[];
}

export interface AxisEntry {
  index: number;
  name: string;
  weight: number;
}

export interface AxesResponse {
  projection_id: string;
  axes: AxisEntry[];
}

export interface HistogramWire {
  edges: number[];
  counts: number[];
}

export interface HistogramsResponse {
  projection_id: string;
  density: HistogramWire;
  cost: HistogramWire;
}

export interface ShepardResponse {
  projection_id: string;
  mode: string;
  bins?: number;
  counts?: number[][];
  pairs?: [number, number][];
}

export interface DatasetWire {
  dataset_id?: string;
  n: number;
  d: number;
  dim_names: string[];
  labels: string[] | null;
  values: string;
}

export interface SessionSummary {
  session_id: string;
  dataset_id: string;
  representative_ids: string[];
  chosen_projection_id: string | null;
  annotations: { timestamp: string; author: string; text: string; selection: number[] | null }[];
}

export interface RankResponse {
  session_id: string;
  metric: string;
  ids: string[];
  scores: number[];
}

export interface JobState {
  id: string;
  session_id: string;
  status: "running" | "done" | "failed";
  progress: number;
  error: string | null;
  result: { representative_ids: string[]; pool_size: number } | null;
}

export function decodeFloats(b64: string): Float64Array {
  const bin = atob(b64);
  const bytes = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
  return new Float64Array(bytes.buffer, 0, bytes.byteLength / 8);
}

export function decodeCoords(b64: string, n: number): [number, number][] {
  const flat = decodeFloats(b64);
  const out: [number, number][] = new Array(n);
  for (let i = 0; i < n; i++) out[i] = [flat[2 * i], flat[2 * i + 1]];
  return out;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  uploadDataset(csv: string, labelColumn?: string) {
    const query = labelColumn ? `?label_column=${encodeURIComponent(labelColumn)}` : "";
    return this.request<{ dataset_id: string; n: number; d: number }>(
      `/datasets${query}`, { method: "POST", body: csv });
  }

  getDataset(id: string) {
    return this.request<DatasetWire>(`/datasets/${id}`);
  }

  createSession(datasetId: string) {
    return this.post<{ session_id: string }>("/sessions", { dataset_id: datasetId });
  }

  getSession(id: string) {
    return this.request<SessionSummary>(`/sessions/${id}`);
  }

  startGridSearch(sessionId: string, body: unknown) {
    return this.post<{ job_id: string }>(`/sessions/${sessionId}/grid-search`, body);
  }

  getJob(id: string) {
    return this.request<JobState>(`/jobs/${id}`);
  }

  getRepresentatives(sessionId: string, metric: string, top?: number) {
    const t = top != null ? `&top=${top}` : "";
    return this.request<RepresentativesResponse>(
      `/sessions/${sessionId}/representatives?metric=${metric}${t}`);
  }

  rankRepresentatives(sessionId: string, metric: string, selection: number[] | null, top = 6) {
    return this.post<RankResponse>(`/sessions/${sessionId}/representatives/rank`,
      { metric, selection, top });
  }

  runSingle(sessionId: string, params: Partial<TsneParams>) {
    return this.post<{ projection_id: string; scores: QualityScores }>(
      "/runs", { session_id: sessionId, params });
  }

  getProjection(id: string) {
    return this.request<ProjectionDetail>(`/projections/${id}`);
  }

  getShepard(id: string, mode: "heatmap" | "pairs", bins = 10, cap = 5000) {
    return this.request<ShepardResponse>(
      `/projections/${id}/shepard?mode=${mode}&bins=${bins}&cap=${cap}`);
  }

  getHistograms(id: string, bins = 20) {
    return this.request<HistogramsResponse>(`/projections/${id}/histograms?bins=${bins}`);
  }

  neighborhoodPreservation(id: string, selection: number[] | null, kMax: number | null,
                           variant: string) {
    return this.post<NPResponse>(`/projections/${id}/np`,
      { selection, k_max: kMax, variant });
  }

  dimensionCorrelation(id: string, polyline: [number, number][], rho: number | null,
                       threshold: number | null) {
    return this.post<DimCorrResponse>(`/projections/${id}/dimension-correlation`,
      { polyline, rho, threshold });
  }

  adaptiveAxes(id: string, selection: number[]) {
    return this.post<AxesResponse>(`/projections/${id}/adaptive-axes`, { selection });
  }

  annotate(sessionId: string, author: string, text: string, selection: number[] | null) {
    return this.post<{ count: number }>(`/sessions/${sessionId}/annotations`,
      { author, text, selection });
  }
}

/** Discards responses of superseded gestures: only the latest ticket wins. */
export class LatestGate {
  private seq = 0;

  next(): number {
    return ++this.seq;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.seq;
  }
}
