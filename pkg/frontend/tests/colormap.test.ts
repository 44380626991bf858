import { describe, expect, it } from "vitest";

import { sigmaColor, sigmaHue, stiffnessBarWidth } from "../src/colormap.js";

describe("sigma color map", () => {
  it("is cool at zero and hot at one", () => {
    expect(sigmaHue(0)).toBe(210);
    expect(sigmaHue(1)).toBe(0);
  });

  it("cools monotonically with falling uncertainty", () => {
    let previous = -1;
    for (let s = 1; s >= 0; s -= 0.1) {
      const hue = sigmaHue(s);
      expect(hue).toBeGreaterThanOrEqual(previous);
      previous = hue;
    }
  });

  it("clamps out-of-range sigma", () => {
    expect(sigmaHue(-0.5)).toBe(210);
    expect(sigmaHue(1.5)).toBe(0);
    expect(sigmaColor(2)).toContain("hsl(0");
  });
});

describe("stiffness bar", () => {
  it("is full width when unregulated and shrinks with the scale", () => {
    expect(stiffnessBarWidth(1.0, 120)).toBe(120);
    expect(stiffnessBarWidth(0.5, 120)).toBe(60);
    expect(stiffnessBarWidth(0.0, 120)).toBe(0);
    expect(stiffnessBarWidth(-1, 120)).toBe(0);
  });
});
