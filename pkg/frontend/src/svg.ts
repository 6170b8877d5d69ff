// SVG path helpers for the streamgraph (no DOM dependency).

import type { RGB } from "./types.js";

export function rgbCss([r, g, b]: RGB, alpha = 1): string {
  return alpha >= 1 ? `rgb(${r},${g},${b})` : `rgba(${r},${g},${b},${alpha})`;
}

/** Closed area path between a lower and an upper polyline sharing x
 * coordinates. */
export function areaPath(xs: number[], lower: number[], upper: number[]): string {
  if (xs.length === 0) return "";
  const fwd = xs.map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${upper[i].toFixed(2)}`);
  const back: string[] = [];
  for (let i = xs.length - 1; i >= 0; i--) {
    back.push(`L${xs[i].toFixed(2)},${lower[i].toFixed(2)}`);
  }
  return fwd.join("") + back.join("") + "Z";
}
