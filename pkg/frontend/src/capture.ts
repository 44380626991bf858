/**
 * Pointer-to-frame transduction. Demonstration strokes are sampled at a
 * bounded capture rate with strictly increasing client timestamps; drag
 * frames are emitted immediately on pointer movement, so the pointer
 * reaches the wire within the same input event.
 */

import type { ArmName, ClientFrame } from "./protocol.js";

export class DemoCapture {
  private startMs: number | null = null;
  private lastT = -Infinity;
  private minIntervalS: number;

  constructor(captureHz = 60) {
    this.minIntervalS = 1 / captureHz;
  }

  begin(): void {
    this.startMs = null;
    this.lastT = -Infinity;
  }

  /**
   * Turn one pointer sample into a demo_point frame, or null while the
   * capture-rate throttle holds it back. nowMs is the client clock.
   */
  sample(arm: ArmName, world: number[], nowMs: number): ClientFrame | null {
    if (this.startMs === null) this.startMs = nowMs;
    const t = (nowMs - this.startMs) / 1000;
    if (t - this.lastT < this.minIntervalS) return null;
    this.lastT = t;
    return { type: "demo_point", arm, x: [world[0], world[1]], t };
  }
}

export class DragEmitter {
  private active = new Set<ArmName>();

  /** Emit a drag frame for every movement; no throttling on corrections. */
  move(arm: ArmName, world: number[]): ClientFrame {
    this.active.add(arm);
    return { type: "drag", arm, pointer_x: [world[0], world[1]] };
  }

  release(arm: ArmName): ClientFrame | null {
    if (!this.active.delete(arm)) return null;
    return { type: "drag_end", arm };
  }

  releaseAll(): ClientFrame[] {
    const frames = [...this.active].map((arm) => ({ type: "drag_end", arm }) as ClientFrame);
    this.active.clear();
    return frames;
  }

  isActive(arm: ArmName): boolean {
    return this.active.has(arm);
  }
}
