// Client-side heatmap compositing: the service exports a grayscale grid;
// tinting and alpha blending happen here so server exports stay
// format-stable.

import type { HeatmapGrid, RGB } from "./types.js";

/** RGBA pixels (row-major) for a heat grid tinted with `color`; the heat
 * value drives the alpha channel. */
export function compositeHeatmap(grid: HeatmapGrid, color: RGB): Uint8ClampedArray {
  const out = new Uint8ClampedArray(grid.width * grid.height * 4);
  for (let i = 0; i < grid.values.length; i++) {
    const v = Math.max(0, Math.min(1, grid.values[i]));
    out[i * 4] = color[0];
    out[i * 4 + 1] = color[1];
    out[i * 4 + 2] = color[2];
    out[i * 4 + 3] = Math.round(v * 200);
  }
  return out;
}
