/** Three visually distinct colormap roles: categorical for labels, a
 * single-hue ramp for the Shepard heatmap, and a multi-hue ramp for the main
 * view, so the encodings cannot be confused with one another. */

export const CATEGORICAL10 = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
  "#edc948", "#76b7b2", "#ff9da7", "#9c755f", "#bab0ac",
];

export function categoricalColor(labelIndex: number): string {
  return CATEGORICAL10[labelIndex % CATEGORICAL10.length];
}

type Rgb = [number, number, number];

function lerp(a: Rgb, b: Rgb, t: number): Rgb {
  return [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t];
}

function rampColor(stops: Rgb[], t: number): string {
  const x = Math.min(1, Math.max(0, t)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(x));
  const [r, g, b] = lerp(stops[i], stops[i + 1], x - i);
  return `rgb(${Math.round(r)},${Math.round(g)},${Math.round(b)})`;
}

const SINGLE_HUE_STOPS: Rgb[] = [
  [247, 251, 255], [198, 219, 239], [107, 174, 214], [33, 113, 181], [8, 48, 107],
];

/** White-to-dark-blue ramp for count grids. */
export function singleHue(t: number): string {
  return rampColor(SINGLE_HUE_STOPS, t);
}

const MULTI_HUE_STOPS: Rgb[] = [
  [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
];

/** Purple-teal-yellow ramp for continuous per-point values in the main view. */
export function multiHue(t: number): string {
  return rampColor(MULTI_HUE_STOPS, t);
}

export function withAlpha(color: string, alpha: number): string {
  if (color.startsWith("rgb(")) {
    return `rgba(${color.slice(4, -1)},${alpha})`;
  }
  const r = parseInt(color.slice(1, 3), 16);
  const g = parseInt(color.slice(3, 5), 16);
  const b = parseInt(color.slice(5, 7), 16);
  return `rgba(${r},${g},${b},${alpha})`;
}
