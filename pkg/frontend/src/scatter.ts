/** Embedding scatter: parses the 2-D coordinates export and draws it
 * on a canvas with pan/zoom, a highlighted selection, and its
 * neighbors. Coordinates come from the export file as-is; the only
 * math here is the world-to-screen transform.
 */

import type { Viewport } from "./state.js";

export interface Point {
  id: string;
  x: number;
  y: number;
}

/** Parse the coordinates TSV (header: id, x, y). Blank lines are
 * skipped; a malformed row raises rather than silently dropping. */
export function parseCoords(tsv: string): Point[] {
  const lines = tsv.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) return [];
  const header = lines[0]!.split("\t");
  if (header[0] !== "id" || header[1] !== "x" || header[2] !== "y") {
    throw new Error(`unexpected coordinates header: ${lines[0]}`);
  }
  return lines.slice(1).map((line, index) => {
    const parts = line.split("\t");
    const x = Number(parts[1]);
    const y = Number(parts[2]);
    if (parts.length !== 3 || parts[0]!.length === 0 || !Number.isFinite(x) || !Number.isFinite(y)) {
      throw new Error(`bad coordinates row ${index + 2}: ${line}`);
    }
    return { id: parts[0]!, x, y };
  });
}

export interface Screen {
  width: number;
  height: number;
}

/** Viewport is expressed in world units; scale 1 fits the bounding
 * box of all points into the shorter screen edge with a margin. */
export function worldToScreen(
  point: { x: number; y: number },
  bounds: { minX: number; maxX: number; minY: number; maxY: number },
  viewport: Viewport,
  screen: Screen,
): { x: number; y: number } {
  const spanX = bounds.maxX - bounds.minX || 1;
  const spanY = bounds.maxY - bounds.minY || 1;
  const fit = (0.9 * Math.min(screen.width, screen.height)) / Math.max(spanX, spanY);
  const zoom = fit * viewport.scale;
  const midX = (bounds.minX + bounds.maxX) / 2 + viewport.centerX;
  const midY = (bounds.minY + bounds.maxY) / 2 + viewport.centerY;
  return {
    x: screen.width / 2 + (point.x - midX) * zoom,
    y: screen.height / 2 - (point.y - midY) * zoom,
  };
}

export function boundsOf(points: readonly Point[]) {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    if (p.x < minX) minX = p.x;
    if (p.x > maxX) maxX = p.x;
    if (p.y < minY) minY = p.y;
    if (p.y > maxY) maxY = p.y;
  }
  if (points.length === 0) {
    return { minX: 0, maxX: 1, minY: 0, maxY: 1 };
  }
  return { minX, maxX, minY, maxY };
}

export interface ScatterMarks {
  highlight?: string;
  neighbors?: ReadonlySet<string>;
}

export function drawScatter(
  canvas: HTMLCanvasElement,
  points: readonly Point[],
  viewport: Viewport,
  marks: ScatterMarks = {},
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const screen = { width: canvas.width, height: canvas.height };
  const bounds = boundsOf(points);
  ctx.clearRect(0, 0, screen.width, screen.height);
  for (const point of points) {
    const { x, y } = worldToScreen(point, bounds, viewport, screen);
    if (x < -4 || y < -4 || x > screen.width + 4 || y > screen.height + 4) {
      continue;
    }
    if (point.id === marks.highlight) {
      ctx.fillStyle = "#d62728";
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, 2 * Math.PI);
      ctx.fill();
    } else if (marks.neighbors?.has(point.id)) {
      ctx.fillStyle = "#ff7f0e";
      ctx.beginPath();
      ctx.arc(x, y, 3.5, 0, 2 * Math.PI);
      ctx.fill();
    } else {
      ctx.fillStyle = "rgba(31, 119, 180, 0.35)";
      ctx.fillRect(x - 1, y - 1, 2, 2);
    }
  }
}

/** Nearest point to a screen position, for click-to-select. */
export function pickPoint(
  points: readonly Point[],
  viewport: Viewport,
  screen: Screen,
  clickX: number,
  clickY: number,
  radius = 8,
): Point | null {
  const bounds = boundsOf(points);
  let best: Point | null = null;
  let bestDist = radius * radius;
  for (const point of points) {
    const { x, y } = worldToScreen(point, bounds, viewport, screen);
    const d = (x - clickX) ** 2 + (y - clickY) ** 2;
    if (d <= bestDist) {
      best = point;
      bestDist = d;
    }
  }
  return best;
}
