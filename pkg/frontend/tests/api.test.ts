import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import type { QueryResponse } from "../src/api";
import { byName, interactions, replayTransport } from "./replay";

const client = new ApiClient(replayTransport());

describe("client pass-through of captured service responses", () => {
  it("covers at least 20 scripted interactions", () => {
    expect(interactions.length).toBeGreaterThanOrEqual(20);
  });

  it("returns every successful response byte-for-byte", async () => {
    for (const i of interactions.filter((i) => i.response.status === 200)) {
      const got = await (i.request.method === "GET"
        ? (client as any)[i.request.path.slice(1)]()
        : i.request.path === "/query"
          ? client.query(i.request.body as any)
          : client.raster(i.request.body as any));
      expect(got).toEqual(i.response.json);
    }
  });

  it("surfaces every captured error with its status and detail", async () => {
    for (const i of interactions.filter((i) => i.response.status >= 400)) {
      const call =
        i.request.path === "/query"
          ? client.query(i.request.body as any)
          : client.raster(i.request.body as any);
      const err = await call.then(
        () => null,
        (e) => e,
      );
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(i.response.status);
      expect((err as ApiError).detail).toBe(
        (i.response.json as { detail: string }).detail,
      );
    }
  });
});

describe("schema and classes", () => {
  it("parses the feature schema", async () => {
    const s = await client.schema();
    expect(s.features.map((f) => f.name)).toEqual(["x0", "x1"]);
    for (const f of s.features) expect(f.lo).toBeLessThan(f.hi);
  });

  it("lists indexed classes", async () => {
    const c = await client.classes();
    expect(c.classes).toEqual([0, 1, 2]);
    expect(c.indexed).toEqual([0, 1, 2]);
  });
});

describe("query responses", () => {
  it("re-binds the counterfactual fields without alteration", async () => {
    const i = byName("query_l2_0");
    const r = await client.query(i.request.body as any);
    const want = i.response.json as QueryResponse;
    expect(r.distance).toBe(want.distance);
    expect(r.x_cf).toEqual(want.x_cf);
    expect(r.rect_id).toBe(want.rect_id);
    expect(r.certificate.rects_evaluated).toBe(
      want.certificate.rects_evaluated,
    );
  });

  it("flags an infeasible freeze as such", async () => {
    const i = byName("freeze_all");
    const err = await client.query(i.request.body as any).then(
      () => null,
      (e) => e as ApiError,
    );
    expect(err?.infeasible).toBe(true);
    expect(err?.detail).toMatch(/no admissible region/);
  });

  it("does not flag a bad request as infeasible", async () => {
    const i = byName("query_bad_dim");
    const err = await client.query(i.request.body as any).then(
      () => null,
      (e) => e as ApiError,
    );
    expect(err?.status).toBe(400);
    expect(err?.infeasible).toBe(false);
  });
});
