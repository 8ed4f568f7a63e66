/** Test helpers: recorded-scenario fetch mock and a recording canvas. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { Canvas2D } from "../src/render.js";

export interface Scenario {
  session_id: string;
  projection_id: string;
  session: any;
  dataset: any;
  representatives: any;
  projection: any;
  shepard_heatmap: any;
  histograms: any;
  np_global: any;
  lasso_indices: number[];
  np_selection: any;
  axes_selection: any;
  polyline: [number, number][];
  rho: number;
  dimcorr: any;
  rank_selection: any;
}

export function loadScenario(): Scenario {
  const here = dirname(fileURLToPath(import.meta.url));
  return JSON.parse(readFileSync(join(here, "fixtures", "scenario.json"), "utf-8"));
}

function jsonResponse(payload: unknown): Response {
  return {
    ok: true,
    status: 200,
    json: async () => payload,
  } as unknown as Response;
}

function sameIndices(a: number[] | null, b: number[] | null): boolean {
  if (a == null || b == null) return a === b;
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** Serves exactly the recorded scenario; anything off-script throws. */
export function scenarioFetch(sc: Scenario) {
  const calls: { url: string; body: any }[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body ? JSON.parse(init.body as string) : null;
    calls.push({ url, body });
    const pid = sc.projection_id;
    if (url === `/sessions/${sc.session_id}`) return jsonResponse(sc.session);
    if (url.startsWith(`/datasets/`)) return jsonResponse(sc.dataset);
    if (url.startsWith(`/sessions/${sc.session_id}/representatives?`)) {
      return jsonResponse(sc.representatives);
    }
    if (url === `/sessions/${sc.session_id}/representatives/rank`) {
      return jsonResponse(sc.rank_selection);
    }
    if (url === `/projections/${pid}`) return jsonResponse(sc.projection);
    if (url.startsWith(`/projections/${pid}/shepard`)) return jsonResponse(sc.shepard_heatmap);
    if (url.startsWith(`/projections/${pid}/histograms`)) return jsonResponse(sc.histograms);
    if (url === `/projections/${pid}/np`) {
      if (body.selection == null) return jsonResponse(sc.np_global);
      if (sameIndices(body.selection, sc.lasso_indices)) return jsonResponse(sc.np_selection);
      throw new Error(`unexpected np selection ${JSON.stringify(body.selection)}`);
    }
    if (url === `/projections/${pid}/adaptive-axes`) {
      if (sameIndices(body.selection, sc.lasso_indices)) return jsonResponse(sc.axes_selection);
      throw new Error("unexpected axes selection");
    }
    if (url === `/projections/${pid}/dimension-correlation`) {
      return jsonResponse(sc.dimcorr);
    }
    throw new Error(`unmocked request: ${url}`);
  };
  return { fetchFn, calls };
}

/** Canvas stub that records every draw command for pixel-equality checks. */
export function recordingContext(): { ctx: Canvas2D; commands: string[] } {
  const commands: string[] = [];
  let fillStyle = "";
  let strokeStyle = "";
  let lineWidth = 1;
  let font = "";
  let globalAlpha = 1;
  const log = (name: string, ...args: unknown[]) => {
    commands.push(`${name}(${args.map((a) => String(a)).join(",")})`
      + `|f=${fillStyle}|s=${strokeStyle}|w=${lineWidth}|a=${globalAlpha}|fo=${font}`);
  };
  const ctx = {
    clearRect: (...a: number[]) => log("clearRect", ...a),
    fillRect: (...a: number[]) => log("fillRect", ...a),
    strokeRect: (...a: number[]) => log("strokeRect", ...a),
    beginPath: () => log("beginPath"),
    moveTo: (...a: number[]) => log("moveTo", ...a),
    lineTo: (...a: number[]) => log("lineTo", ...a),
    arc: (...a: number[]) => log("arc", ...a),
    closePath: () => log("closePath"),
    fill: () => log("fill"),
    stroke: () => log("stroke"),
    fillText: (t: string, x: number, y: number) => log("fillText", t, x, y),
    get fillStyle() { return fillStyle; },
    set fillStyle(v: any) { fillStyle = String(v); },
    get strokeStyle() { return strokeStyle; },
    set strokeStyle(v: any) { strokeStyle = String(v); },
    get lineWidth() { return lineWidth; },
    set lineWidth(v: number) { lineWidth = v; },
    get font() { return font; },
    set font(v: string) { font = v; },
    get globalAlpha() { return globalAlpha; },
    set globalAlpha(v: number) { globalAlpha = v; },
  } as Canvas2D;
  return { ctx, commands };
}
