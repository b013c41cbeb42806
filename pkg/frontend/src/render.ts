/**
 * Pure rendering helpers: snapshot in, markup/paths out. Nothing here
 * touches the DOM or computes controller state — every number shown
 * comes from a server message, and the same snapshot always renders
 * the same output (snapshot-testable).
 */

import type { Grid, Snapshot, Status } from "./protocol.js";

export const CELL_PX = 22;
export const STALE_AFTER_MS = 2000;

/** Fixed-scale color for one cell: dark blue (0) through warm yellow (peak). */
export function heatColor(value: number, peak: number): string {
  const t = peak > 0 ? Math.min(1, Math.max(0, value / peak)) : 0;
  const hue = 240 - 200 * t;          // blue -> red/yellow
  const light = 18 + 42 * t;
  return `hsl(${hue.toFixed(1)}, 85%, ${light.toFixed(1)}%)`;
}

/**
 * Outline of the support region: every cell edge between a 1-cell and a
 * 0-cell (or the grid border). Returned as SVG line segments in cell
 * coordinates scaled by CELL_PX.
 */
export function supportOutline(support: Grid): string[] {
  const rows = support.length;
  const cols = rows > 0 ? support[0]!.length : 0;
  const at = (r: number, c: number): number =>
    r >= 0 && r < rows && c >= 0 && c < cols ? support[r]![c]! : 0;
  const segments: string[] = [];
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      if (!at(r, c)) continue;
      const x = c * CELL_PX;
      const y = r * CELL_PX;
      if (!at(r - 1, c)) segments.push(`M${x} ${y}H${x + CELL_PX}`);
      if (!at(r + 1, c)) segments.push(`M${x} ${y + CELL_PX}H${x + CELL_PX}`);
      if (!at(r, c - 1)) segments.push(`M${x} ${y}V${y + CELL_PX}`);
      if (!at(r, c + 1)) segments.push(`M${x + CELL_PX} ${y}V${y + CELL_PX}`);
    }
  }
  return segments;
}

/** One heatmap as inline SVG with the support outline overlaid. */
export function renderHeatmapSVG(values: Grid, support: Grid, peak: number): string {
  const rows = values.length;
  const cols = rows > 0 ? values[0]!.length : 0;
  const cells: string[] = [];
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      cells.push(
        `<rect x="${c * CELL_PX}" y="${r * CELL_PX}" width="${CELL_PX}" height="${CELL_PX}"` +
        ` fill="${heatColor(values[r]![c]!, peak)}"/>`,
      );
    }
  }
  const outline = supportOutline(support).join("");
  return (
    `<svg viewBox="0 0 ${cols * CELL_PX} ${rows * CELL_PX}"` +
    ` width="${cols * CELL_PX}" height="${rows * CELL_PX}">` +
    cells.join("") +
    `<path d="${outline}" stroke="#fff" stroke-width="1.5" fill="none"/></svg>`
  );
}

/** Both panels side by side; pressure scale is fixed per run via peakKgf. */
export function renderSnapshot(snapshot: Snapshot, peakKgf: number): string {
  const pressure = renderHeatmapSVG(snapshot.pressures, snapshot.support, peakKgf);
  const extension = renderHeatmapSVG(snapshot.extensions, snapshot.support, 60);
  return (
    `<div class="maps" data-tick="${snapshot.tick}">` +
    `<figure><figcaption>pressure (kgf)</figcaption>${pressure}</figure>` +
    `<figure><figcaption>extension (mm)</figcaption>${extension}</figure></div>`
  );
}

/**
 * Rolling sparkline of max|D| with the ±deadband band. The path is in a
 * fixed width×height box; an empty trace yields an empty path.
 */
export function sparkline(
  trace: number[],
  deadband: number,
  width = 240,
  height = 48,
): { path: string; bandY: number; bandHeight: number } {
  const peak = Math.max(deadband * 3, ...trace);
  const y = (v: number): number => height - (v / peak) * height;
  const bandY = y(deadband);
  const points = trace.map((v, i) => {
    const x = trace.length > 1 ? (i / (trace.length - 1)) * width : 0;
    return `${i === 0 ? "M" : "L"}${x.toFixed(1)} ${y(v).toFixed(1)}`;
  });
  return { path: points.join(""), bandY, bandHeight: height - bandY };
}

export function renderSparklineSVG(trace: number[], deadband: number): string {
  const width = 240;
  const height = 48;
  const { path, bandY, bandHeight } = sparkline(trace, deadband, width, height);
  return (
    `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">` +
    `<rect x="0" y="${bandY.toFixed(1)}" width="${width}" height="${bandHeight.toFixed(1)}"` +
    ` fill="#2d4" opacity="0.25"/>` +
    `<path d="${path}" stroke="#fa3" fill="none" stroke-width="1.5"/></svg>`
  );
}

export function formatStatus(status: Status): string {
  return (
    `${status.weight_kgf.toFixed(2)} kgf | mode ${status.mode} | ` +
    `${status.active ? "active" : "idle"} | ` +
    `${status.converged ? "converged" : "settling"} | tick ${status.tick}` +
    (status.excluded_count > 0 ? ` | ${status.excluded_count} excluded` : "")
  );
}

/** Label for snapshot age; empty while fresh, explicit once stale. */
export function staleLabel(ageMs: number | null): string {
  if (ageMs === null) return "no data yet";
  if (ageMs <= STALE_AFTER_MS) return "";
  return `stale: last snapshot ${(ageMs / 1000).toFixed(1)} s ago`;
}
