import { describe, expect, it } from "vitest";

import type { TickFrame } from "../src/protocol.js";
import { TRAIL_LIMIT, UiState } from "../src/state.js";

function tickAt(t: number, x: number[] = [0.1, 0.2]): TickFrame {
  return {
    type: "tick",
    t,
    phase: "executing",
    arms: [{
      arm: "left", x, v: [0, 0], attractor: [x[0] + 0.01, x[1]],
      sigma: 0.123456, k_scale: 0.875, t_b: t / 2, f_ext: [1.5, 0],
    }],
  };
}

describe("tick coalescing", () => {
  it("renders only the newest queued tick per animation frame", () => {
    const state = new UiState();
    for (let k = 1; k <= 5; k++) state.ingest(tickAt(k));
    expect(state.pendingCount).toBe(5);
    const latest = state.takeLatestTick();
    expect(latest?.t).toBe(5);
    expect(state.pendingCount).toBe(0);
    expect(state.takeLatestTick()).toBeNull();
  });

  it("stores server numbers verbatim, computing nothing", () => {
    const state = new UiState();
    state.ingest(tickAt(2.5));
    state.takeLatestTick();
    const arm = state.armTick("left")!;
    expect(arm.sigma).toBe(0.123456);
    expect(arm.k_scale).toBe(0.875);
    expect(arm.f_ext).toEqual([1.5, 0]);
    expect(state.phase).toBe("executing");
  });
});

describe("trails", () => {
  it("appends applied ticks and caps the length", () => {
    const state = new UiState();
    for (let k = 0; k < TRAIL_LIMIT + 50; k++) {
      state.ingest(tickAt(k, [k * 1e-4, 0.2]));
      state.takeLatestTick();
    }
    const trail = state.trails.get("left")!;
    expect(trail.length).toBe(TRAIL_LIMIT);
    expect(trail[trail.length - 1][0]).toBeCloseTo((TRAIL_LIMIT + 49) * 1e-4, 12);
  });

  it("clears per arm or entirely", () => {
    const state = new UiState();
    state.ingest(tickAt(1));
    state.takeLatestTick();
    state.clearTrail("left");
    expect(state.trails.has("left")).toBe(false);
  });
});

describe("model info and progress", () => {
  it("tracks the scrubber from the goal time, display only", () => {
    const state = new UiState();
    state.ingest({ type: "model_info", arm: "left", n_nodes: 99, goal: [0.9, 0.5, 5.0] });
    expect(state.models.get("left")?.nNodes).toBe(99);
    state.ingest(tickAt(5.0)); // t_b = 2.5 of a 5 s trajectory
    state.takeLatestTick();
    expect(state.timeProgress("left")).toBeCloseTo(0.5, 12);
    expect(state.timeProgress("right")).toBeNull();
  });

  it("keeps the last error for the status line", () => {
    const state = new UiState();
    state.ingest({ type: "error", code: "bad_phase", msg: "not now" });
    expect(state.lastError).toBe("bad_phase: not now");
  });
});
