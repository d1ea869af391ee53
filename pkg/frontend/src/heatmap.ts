/** Heatmap model for the 2-D raster view: colors keyed by region id (same
 * golden-ratio hue walk the service's PPM export uses) and hover lookup. */

import type { RasterResponse } from "./api";

export type Rgb = [number, number, number];

const GOLDEN = 0.6180339887498949;

function hsvToRgb(h: number, s: number, v: number): Rgb {
  const i = Math.floor(h * 6);
  const f = h * 6 - i;
  const p = v * (1 - s);
  const q = v * (1 - f * s);
  const t = v * (1 - (1 - f) * s);
  const pick: Rgb[] = [
    [v, t, p],
    [q, v, p],
    [p, v, t],
    [p, q, v],
    [t, p, v],
    [v, p, q],
  ];
  const [r, g, b] = pick[i % 6];
  return [Math.trunc(r * 255), Math.trunc(g * 255), Math.trunc(b * 255)];
}

export function regionColor(rectId: number): Rgb {
  const hue = (rectId * GOLDEN) % 1.0;
  return hsvToRgb(hue, 0.65, 0.95);
}

export function cssColor([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}

export interface HoverInfo {
  ix: number;
  iy: number;
  cx: number;
  cy: number;
  rectId: number;
  classLabel: number;
  distance: number;
}

export class HeatmapModel {
  constructor(private readonly raster: RasterResponse) {}

  get shape(): [number, number] {
    return [this.raster.ys.length, this.raster.xs.length];
  }

  colorAt(ix: number, iy: number): Rgb {
    return regionColor(this.raster.region_ids[iy][ix]);
  }

  /** Distance shading in [0, 1]: 0 inside the target region, 1 farthest. */
  shadeAt(ix: number, iy: number): number {
    let max = 0;
    for (const row of this.raster.distances) {
      for (const d of row) if (d > max) max = d;
    }
    return max === 0 ? 0 : this.raster.distances[iy][ix] / max;
  }

  hover(ix: number, iy: number): HoverInfo {
    const rectId = this.raster.region_ids[iy][ix];
    return {
      ix,
      iy,
      cx: this.raster.xs[ix],
      cy: this.raster.ys[iy],
      rectId,
      classLabel: this.raster.legend[String(rectId)],
      distance: this.raster.distances[iy][ix],
    };
  }

  /** Grid cell holding a domain point, or null outside the raster. */
  cellOf(x: number, y: number): [number, number] | null {
    const ix = nearestIndex(this.raster.xs, x);
    const iy = nearestIndex(this.raster.ys, y);
    return ix === null || iy === null ? null : [ix, iy];
  }
}

function nearestIndex(centers: number[], v: number): number | null {
  if (centers.length < 2) return centers.length === 1 ? 0 : null;
  const step = centers[1] - centers[0];
  if (v < centers[0] - step / 2 || v > centers[centers.length - 1] + step / 2) {
    return null;
  }
  let best = 0;
  for (let i = 1; i < centers.length; i++) {
    if (Math.abs(centers[i] - v) < Math.abs(centers[best] - v)) best = i;
  }
  return best;
}
