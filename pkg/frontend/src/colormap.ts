/**
 * Visual encodings of the server's uncertainty and stiffness numbers.
 * Cool hues mean the policy is confident (sigma near 0), hot hues mean it
 * is far from anything it was taught (sigma near 1); the stiffness bar
 * shrinks with the regulation scale the server reports.
 */

/** Hue sweep 210 (blue) -> 0 (red), saturating lightness a little at the ends. */
export function sigmaColor(sigma: number): string {
  const s = Math.min(Math.max(sigma, 0), 1);
  const hue = 210 * (1 - s);
  return `hsl(${hue.toFixed(1)}, 85%, 55%)`;
}

export function sigmaHue(sigma: number): number {
  const s = Math.min(Math.max(sigma, 0), 1);
  return 210 * (1 - s);
}

/** Width of the per-arm stiffness bar; full width when unregulated. */
export function stiffnessBarWidth(kScale: number, fullPx: number): number {
  const s = Math.min(Math.max(kScale, 0), 1);
  return s * fullPx;
}
