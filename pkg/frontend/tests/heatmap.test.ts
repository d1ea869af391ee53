import { describe, expect, it } from "vitest";

import type { RasterResponse } from "../src/api";
import { HeatmapModel, cssColor, regionColor } from "../src/heatmap";
import { byName } from "./replay";

const raster = byName("raster_l1").response.json as RasterResponse;

describe("region colors", () => {
  it("matches the service's PPM palette", () => {
    // reference triples computed by the service's own color function
    expect(regionColor(0)).toEqual([242, 84, 84]);
    expect(regionColor(1)).toEqual([84, 130, 242]);
    expect(regionColor(5)).toEqual([242, 169, 84]);
    expect(regionColor(123)).toEqual([242, 101, 84]);
    expect(regionColor(241762)).toEqual([242, 210, 84]);
  });

  it("is deterministic and css-serializable", () => {
    expect(regionColor(99)).toEqual(regionColor(99));
    expect(cssColor([1, 2, 3])).toBe("rgb(1,2,3)");
  });
});

describe("heatmap model over a captured raster", () => {
  const model = new HeatmapModel(raster);

  it("has the captured shape", () => {
    expect(model.shape).toEqual([6, 8]);
  });

  it("hover reports the captured cell values verbatim", () => {
    for (const [ix, iy] of [
      [0, 0],
      [7, 5],
      [3, 2],
    ] as const) {
      const info = model.hover(ix, iy);
      const rectId = raster.region_ids[iy][ix];
      expect(info.rectId).toBe(rectId);
      expect(info.distance).toBe(raster.distances[iy][ix]);
      expect(info.classLabel).toBe(raster.legend[String(rectId)]);
      expect(info.cx).toBe(raster.xs[ix]);
      expect(info.cy).toBe(raster.ys[iy]);
    }
  });

  it("cells inside the target region shade to zero", () => {
    for (let iy = 0; iy < 6; iy++) {
      for (let ix = 0; ix < 8; ix++) {
        const shade = model.shadeAt(ix, iy);
        expect(shade).toBeGreaterThanOrEqual(0);
        expect(shade).toBeLessThanOrEqual(1);
        if (raster.distances[iy][ix] === 0) expect(shade).toBe(0);
      }
    }
  });

  it("maps cell centers back to their own cell", () => {
    expect(model.cellOf(raster.xs[2], raster.ys[4])).toEqual([2, 4]);
    expect(model.cellOf(raster.xs[0], raster.ys[0])).toEqual([0, 0]);
  });

  it("returns null outside the rastered window", () => {
    const step = raster.xs[1] - raster.xs[0];
    expect(model.cellOf(raster.xs[7] + step, raster.ys[0])).toBeNull();
  });
});
