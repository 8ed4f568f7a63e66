/** Client-side geometry: lasso containment, quadtree hover hit-testing and
 * linear scales. Only index sets ever leave the browser. */

export type Point = [number, number];

/** Even-odd rule point-in-polygon test. */
export function pointInPolygon(pt: Point, polygon: Point[]): boolean {
  let inside = false;
  const [x, y] = pt;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [xi, yi] = polygon[i];
    const [xj, yj] = polygon[j];
    if ((yi > y) !== (yj > y) && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

/** Indices of the coordinates captured by a lasso polygon. */
export function lassoSelect(coords: Point[], polygon: Point[]): number[] {
  if (polygon.length < 3) return [];
  const out: number[] = [];
  for (let i = 0; i < coords.length; i++) {
    if (pointInPolygon(coords[i], polygon)) out.push(i);
  }
  return out;
}

interface QuadNode {
  cx: number;
  cy: number;
  half: number;
  index: number;
  px: number;
  py: number;
  count: number;
  children: (QuadNode | null)[] | null;
}

/** Point quadtree for nearest-neighbor hover queries on the scatterplot. */
export class Quadtree {
  private root: QuadNode | null = null;

  constructor(points: Point[]) {
    if (!points.length) return;
    let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
    for (const [x, y] of points) {
      minX = Math.min(minX, x); maxX = Math.max(maxX, x);
      minY = Math.min(minY, y); maxY = Math.max(maxY, y);
    }
    const half = Math.max(maxX - minX, maxY - minY) / 2 * 1.001 + 1e-9;
    this.root = {
      cx: (minX + maxX) / 2, cy: (minY + maxY) / 2, half,
      index: -1, px: 0, py: 0, count: 0, children: null,
    };
    for (let i = 0; i < points.length; i++) this.insert(points[i][0], points[i][1], i);
  }

  private insert(x: number, y: number, index: number): void {
    let node = this.root!;
    for (;;) {
      node.count += 1;
      if (node.count === 1) {
        node.index = index;
        node.px = x;
        node.py = y;
        return;
      }
      if (!node.children) {
        if ((node.px === x && node.py === y) || node.half < 1e-12) return; // coincident
        node.children = [null, null, null, null];
        this.descend(node, node.px, node.py, node.index, node.count - 1);
      }
      const q = (x >= node.cx ? 1 : 0) + (y >= node.cy ? 2 : 0);
      if (!node.children[q]) {
        node.children[q] = this.makeChild(node, q);
      }
      node = node.children[q]!;
    }
  }

  private makeChild(node: QuadNode, q: number): QuadNode {
    const h = node.half / 2;
    return {
      cx: node.cx + ((q & 1) ? h : -h),
      cy: node.cy + ((q & 2) ? h : -h),
      half: h, index: -1, px: 0, py: 0, count: 0, children: null,
    };
  }

  private descend(node: QuadNode, x: number, y: number, index: number, count: number): void {
    const q = (x >= node.cx ? 1 : 0) + (y >= node.cy ? 2 : 0);
    if (!node.children![q]) node.children![q] = this.makeChild(node, q);
    const child = node.children![q]!;
    child.count = count;
    child.index = index;
    child.px = x;
    child.py = y;
  }

  /** Index of the nearest point within `radius`, or -1. */
  nearest(x: number, y: number, radius: number): number {
    if (!this.root) return -1;
    let best = -1;
    let bestDist = radius * radius;
    const stack: QuadNode[] = [this.root];
    while (stack.length) {
      const node = stack.pop()!;
      if (node.count === 0) continue;
      const dx = Math.max(Math.abs(x - node.cx) - node.half, 0);
      const dy = Math.max(Math.abs(y - node.cy) - node.half, 0);
      if (dx * dx + dy * dy > bestDist) continue;
      if (!node.children) {
        const ddx = x - node.px;
        const ddy = y - node.py;
        const d2 = ddx * ddx + ddy * ddy;
        if (d2 <= bestDist && node.index >= 0) {
          bestDist = d2;
          best = node.index;
        }
        continue;
      }
      for (const child of node.children) if (child) stack.push(child);
    }
    return best;
  }
}

export interface Scale {
  (v: number): number;
  invert(v: number): number;
}

export function scaleLinear(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.invert = (v: number) => d0 + ((v - r0) / ((r1 - r0) || 1)) * span;
  return fn;
}

/** Total polyline length in the same units as its vertices. */
export function polylineLength(vertices: Point[]): number {
  let total = 0;
  for (let i = 1; i < vertices.length; i++) {
    total += Math.hypot(vertices[i][0] - vertices[i - 1][0],
                        vertices[i][1] - vertices[i - 1][1]);
  }
  return total;
}
