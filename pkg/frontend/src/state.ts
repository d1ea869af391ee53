/** Explorer state and its URL round trip.
 *
 * Every knob of the UI lives in this one object; serializing it into the
 * URL query string makes any explored view shareable and reproducible.
 */

import type { NormName } from "./api";

export interface ExplorerState {
  x: number[];
  target: number | null;
  norm: NormName;
  weights: number[] | null;
  frozen: number[];
  featureX: number;
  featureY: number;
  nx: number;
  ny: number;
}

export function defaultState(m: number): ExplorerState {
  return {
    x: new Array(m).fill(0),
    target: null,
    norm: "l2",
    weights: null,
    frozen: [],
    featureX: 0,
    featureY: m > 1 ? 1 : 0,
    nx: 60,
    ny: 60,
  };
}

const NORMS: NormName[] = ["l1", "l2", "linf"];

function nums(s: string): number[] {
  if (s === "") return [];
  return s.split(",").map((v) => {
    const n = Number(v);
    if (!Number.isFinite(n)) throw new Error(`not a number: ${v}`);
    return n;
  });
}

/** Full-precision float list; JS number round trips through its default
 * string form exactly. */
function joinNums(xs: number[]): string {
  return xs.map((v) => String(v)).join(",");
}

export function encodeState(s: ExplorerState): string {
  const q = new URLSearchParams();
  q.set("x", joinNums(s.x));
  if (s.target !== null) q.set("target", String(s.target));
  q.set("norm", s.norm);
  if (s.weights !== null) q.set("w", joinNums(s.weights));
  if (s.frozen.length > 0) q.set("frozen", s.frozen.join(","));
  q.set("fx", String(s.featureX));
  q.set("fy", String(s.featureY));
  q.set("res", `${s.nx}x${s.ny}`);
  return q.toString();
}

export function decodeState(query: string): ExplorerState {
  const q = new URLSearchParams(query);
  const x = nums(q.get("x") ?? "");
  if (x.length === 0) throw new Error("state is missing x");
  const norm = (q.get("norm") ?? "l2") as NormName;
  if (!NORMS.includes(norm)) throw new Error(`unknown norm ${norm}`);
  const res = q.get("res") ?? "60x60";
  const [nx, ny] = res.split("x").map(Number);
  if (!(nx >= 2) || !(ny >= 2)) throw new Error(`bad resolution ${res}`);
  const target = q.has("target") ? Number(q.get("target")) : null;
  const w = q.has("w") ? nums(q.get("w")!) : null;
  const frozen = q.has("frozen")
    ? nums(q.get("frozen")!).map((v) => Math.trunc(v))
    : [];
  return {
    x,
    target,
    norm,
    weights: w,
    frozen,
    featureX: Number(q.get("fx") ?? 0),
    featureY: Number(q.get("fy") ?? (x.length > 1 ? 1 : 0)),
    nx,
    ny,
  };
}

/** The /query body this state asks for; the UI sends exactly this. */
export function queryBodyOf(s: ExplorerState) {
  return {
    x: s.x,
    target: s.target,
    p: s.norm,
    weights: s.weights,
    frozen: s.frozen,
  };
}

/** The /raster body this state asks for. */
export function rasterBodyOf(s: ExplorerState, target: number) {
  return {
    feature_x: s.featureX,
    feature_y: s.featureY,
    fixed_values: s.x,
    nx: s.nx,
    ny: s.ny,
    p: s.norm,
    weights: s.weights,
    target,
  };
}
