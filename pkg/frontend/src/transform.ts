/**
 * World/screen mapping. The workspace is a fixed 1 m x 1 m square mapped
 * onto the canvas, y up in the world and y down on screen; the grid step
 * defaults to 0.05 m so one cell equals the kernel length scale and the
 * uncertainty colors stay visually calibrated.
 */

export const WORKSPACE_SIZE = 1.0;
export const GRID_STEP = 0.05;

export interface Viewport {
  widthPx: number;
  heightPx: number;
}

export function scaleOf(view: Viewport): number {
  return Math.min(view.widthPx, view.heightPx) / WORKSPACE_SIZE;
}

export function worldToScreen(view: Viewport, p: number[]): [number, number] {
  const s = scaleOf(view);
  return [p[0] * s, view.heightPx - p[1] * s];
}

export function screenToWorld(view: Viewport, px: number, py: number): [number, number] {
  const s = scaleOf(view);
  return [px / s, (view.heightPx - py) / s];
}

export function clampToWorkspace(p: number[]): [number, number] {
  const clamp = (v: number) => Math.min(Math.max(v, 0), WORKSPACE_SIZE);
  return [clamp(p[0]), clamp(p[1])];
}

/** Grid line coordinates in world units, both axes. */
export function gridLines(step: number = GRID_STEP): number[] {
  const lines: number[] = [];
  for (let v = 0; v <= WORKSPACE_SIZE + 1e-9; v += step) {
    lines.push(Number(v.toFixed(9)));
  }
  return lines;
}
