/**
 * Client-side view state. The UI computes no physics: everything shown is
 * copied verbatim from the latest server tick frame, and incoming ticks
 * are coalesced so each animation frame renders only the newest one.
 */

import type { ArmTick, ModelInfoFrame, ServerFrame, TickFrame } from "./protocol.js";

export const TRAIL_LIMIT = 600;

export interface ModelSummary {
  nNodes: number;
  goal: number[];
}

export class UiState {
  phase = "idle";
  lastTick: TickFrame | null = null;
  trails = new Map<string, number[][]>();
  models = new Map<string, ModelSummary>();
  lastError: string | null = null;
  couplingEnabled = false;
  private pending: TickFrame[] = [];

  /** Queue a parsed server frame; ticks wait for the next animation frame. */
  ingest(frame: ServerFrame): void {
    switch (frame.type) {
      case "tick":
        this.pending.push(frame);
        break;
      case "model_info":
        this.applyModelInfo(frame);
        break;
      case "error":
        this.lastError = `${frame.code}: ${frame.msg}`;
        break;
      case "ack":
        break;
    }
  }

  /** Coalesce: drop all queued ticks but the newest, then apply it. */
  takeLatestTick(): TickFrame | null {
    if (this.pending.length === 0) return null;
    const latest = this.pending[this.pending.length - 1];
    this.pending.length = 0;
    this.applyTick(latest);
    return latest;
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  private applyTick(tick: TickFrame): void {
    this.lastTick = tick;
    this.phase = tick.phase;
    for (const arm of tick.arms) {
      let trail = this.trails.get(arm.arm);
      if (!trail) {
        trail = [];
        this.trails.set(arm.arm, trail);
      }
      trail.push([arm.x[0], arm.x[1]]);
      if (trail.length > TRAIL_LIMIT) trail.splice(0, trail.length - TRAIL_LIMIT);
    }
  }

  private applyModelInfo(info: ModelInfoFrame): void {
    this.models.set(info.arm, { nNodes: info.n_nodes, goal: info.goal });
  }

  clearTrail(arm?: string): void {
    if (arm) this.trails.delete(arm);
    else this.trails.clear();
  }

  armTick(arm: string): ArmTick | null {
    if (!this.lastTick) return null;
    return this.lastTick.arms.find((a) => a.arm === arm) ?? null;
  }

  /** Display-only trajectory progress: time belief over the goal time. */
  timeProgress(arm: string): number | null {
    const tick = this.armTick(arm);
    const model = this.models.get(arm);
    if (!tick || !model) return null;
    const total = model.goal[model.goal.length - 1];
    if (total <= 0) return null;
    return Math.min(Math.max(tick.t_b / total, 0), 1);
  }
}
