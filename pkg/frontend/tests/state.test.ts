import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import {
  decodeState,
  defaultState,
  encodeState,
  queryBodyOf,
  rasterBodyOf,
} from "../src/state";
import type { ExplorerState } from "../src/state";
import { byName, replayTransport } from "./replay";

describe("URL round trip", () => {
  it("reproduces the default state", () => {
    const s = defaultState(3);
    s.x = [1, 2, 3];
    expect(decodeState(encodeState(s))).toEqual(s);
  });

  it("preserves full float precision", () => {
    const s: ExplorerState = {
      x: [0.1 + 0.2, -1.7976931348623157e308, 1e-300],
      target: 2,
      norm: "linf",
      weights: [2.5, 0.1, 1 / 3],
      frozen: [0, 2],
      featureX: 2,
      featureY: 0,
      nx: 17,
      ny: 33,
    };
    expect(decodeState(encodeState(s))).toEqual(s);
  });

  it("yields the identical service response after the round trip", async () => {
    const fixture = byName("freeze_base");
    const body = fixture.request.body as {
      x: number[];
      target: number;
      p: "l2";
    };
    const s: ExplorerState = {
      ...defaultState(2),
      x: body.x,
      target: body.target,
      norm: body.p,
    };
    const client = new ApiClient(replayTransport());
    const direct = await client.query(queryBodyOf(s));
    const roundTripped = await client.query(
      queryBodyOf(decodeState(encodeState(s))),
    );
    expect(roundTripped).toEqual(direct);
    expect(roundTripped).toEqual(fixture.response.json);
  });

  it("rejects malformed query strings", () => {
    expect(() => decodeState("norm=l2")).toThrow(/missing x/);
    expect(() => decodeState("x=1,2&norm=l9")).toThrow(/unknown norm/);
    expect(() => decodeState("x=1,2&res=1x0")).toThrow(/bad resolution/);
    expect(() => decodeState("x=1,abc")).toThrow(/not a number/);
  });
});

describe("request bodies", () => {
  it("query body mirrors the state exactly", () => {
    const s = defaultState(2);
    s.x = [1.5, -2];
    s.frozen = [1];
    expect(queryBodyOf(s)).toEqual({
      x: [1.5, -2],
      target: null,
      p: "l2",
      weights: null,
      frozen: [1],
    });
  });

  it("raster body uses the current point as the fixed slice", () => {
    const s = defaultState(3);
    s.x = [9, 8, 7];
    s.nx = 12;
    s.ny = 10;
    const b = rasterBodyOf(s, 2);
    expect(b.fixed_values).toEqual([9, 8, 7]);
    expect([b.feature_x, b.feature_y, b.nx, b.ny]).toEqual([0, 1, 12, 10]);
    expect(b.target).toBe(2);
  });
});
