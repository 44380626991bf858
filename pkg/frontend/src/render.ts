/**
 * Canvas drawing. Pure consumer of UiState: world grid, per-arm trails,
 * arm discs colored by uncertainty, attractor crosses, stiffness bars, a
 * coupling glyph between the two arms, phase text and the display-only
 * time-belief scrubber.
 */

import { sigmaColor, stiffnessBarWidth } from "./colormap.js";
import type { ArmTick } from "./protocol.js";
import type { UiState } from "./state.js";
import { GRID_STEP, Viewport, gridLines, worldToScreen } from "./transform.js";

const ARM_COLORS: Record<string, string> = { left: "#0ea5e9", right: "#a855f7" };

export function render(ctx: CanvasRenderingContext2D, state: UiState,
                       view: Viewport): void {
  ctx.clearRect(0, 0, view.widthPx, view.heightPx);
  drawGrid(ctx, view);
  for (const [arm, trail] of state.trails) {
    drawTrail(ctx, view, trail, ARM_COLORS[arm] ?? "#64748b");
  }
  const tick = state.lastTick;
  if (tick) {
    if (state.couplingEnabled && tick.arms.length === 2) {
      drawCouplingGlyph(ctx, view, tick.arms[0], tick.arms[1]);
    }
    tick.arms.forEach((arm, index) => drawArm(ctx, view, arm, index, state));
  }
  drawPhase(ctx, state.phase, state.lastError);
}

function drawGrid(ctx: CanvasRenderingContext2D, view: Viewport): void {
  ctx.strokeStyle = "#e2e8f0";
  ctx.lineWidth = 1;
  for (const v of gridLines(GRID_STEP)) {
    const [x0, y0] = worldToScreen(view, [v, 0]);
    const [x1, y1] = worldToScreen(view, [v, 1]);
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.stroke();
    const [hx0, hy0] = worldToScreen(view, [0, v]);
    const [hx1, hy1] = worldToScreen(view, [1, v]);
    ctx.beginPath();
    ctx.moveTo(hx0, hy0);
    ctx.lineTo(hx1, hy1);
    ctx.stroke();
  }
}

function drawTrail(ctx: CanvasRenderingContext2D, view: Viewport,
                   trail: number[][], color: string): void {
  if (trail.length < 2) return;
  ctx.strokeStyle = color;
  ctx.globalAlpha = 0.45;
  ctx.lineWidth = 2;
  ctx.beginPath();
  const [x0, y0] = worldToScreen(view, trail[0]);
  ctx.moveTo(x0, y0);
  for (const p of trail) {
    const [x, y] = worldToScreen(view, p);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.globalAlpha = 1;
}

function drawArm(ctx: CanvasRenderingContext2D, view: Viewport, arm: ArmTick,
                 index: number, state: UiState): void {
  const [ax, ay] = worldToScreen(view, arm.attractor);
  const [x, y] = worldToScreen(view, arm.x);

  // spring line to the attractor, then the attractor cross
  ctx.strokeStyle = "#94a3b8";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(ax, ay);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = ARM_COLORS[arm.arm] ?? "#64748b";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(ax - 6, ay);
  ctx.lineTo(ax + 6, ay);
  ctx.moveTo(ax, ay - 6);
  ctx.lineTo(ax, ay + 6);
  ctx.stroke();

  // the arm itself, colored by the server-reported uncertainty
  ctx.fillStyle = sigmaColor(arm.sigma);
  ctx.beginPath();
  ctx.arc(x, y, 9, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = "#0f172a";
  ctx.lineWidth = 1.5;
  ctx.stroke();

  drawHud(ctx, view, arm, index, state);
}

function drawHud(ctx: CanvasRenderingContext2D, view: Viewport, arm: ArmTick,
                 index: number, state: UiState): void {
  const barFull = 120;
  const xPad = 12;
  const yBase = 20 + index * 46;
  ctx.fillStyle = "#0f172a";
  ctx.font = "12px sans-serif";
  ctx.fillText(
    `${arm.arm}  sigma ${arm.sigma.toFixed(3)}  stiffness x${arm.k_scale.toFixed(2)}`,
    xPad, yBase - 6);
  ctx.strokeStyle = "#94a3b8";
  ctx.strokeRect(xPad, yBase, barFull, 8);
  ctx.fillStyle = sigmaColor(arm.sigma);
  ctx.fillRect(xPad, yBase, stiffnessBarWidth(arm.k_scale, barFull), 8);

  const progress = state.timeProgress(arm.arm);
  if (progress !== null) {
    ctx.strokeStyle = "#94a3b8";
    ctx.strokeRect(xPad, yBase + 12, barFull, 4);
    ctx.fillStyle = "#475569";
    ctx.fillRect(xPad, yBase + 12, progress * barFull, 4);
  }
}

function drawCouplingGlyph(ctx: CanvasRenderingContext2D, view: Viewport,
                           a: ArmTick, b: ArmTick): void {
  const [x0, y0] = worldToScreen(view, a.x);
  const [x1, y1] = worldToScreen(view, b.x);
  ctx.strokeStyle = "#f59e0b";
  ctx.lineWidth = 3;
  ctx.setLineDash([2, 6]);
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawPhase(ctx: CanvasRenderingContext2D, phase: string,
                   error: string | null): void {
  ctx.fillStyle = "#0f172a";
  ctx.font = "bold 13px sans-serif";
  ctx.fillText(`phase: ${phase}`, 12, 14);
  if (error) {
    ctx.fillStyle = "#dc2626";
    ctx.font = "11px sans-serif";
    ctx.fillText(error, 160, 14);
  }
}
