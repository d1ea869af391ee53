/** Typed client for the counterfactual-map HTTP service.
 *
 * The transport is injected so tests can replay captured interactions and
 * the browser entry point can pass `fetch`.
 */

export interface Feature {
  name: string;
  kind: string;
  lo: number;
  hi: number;
}

export interface SchemaResponse {
  features: Feature[];
}

export interface ClassesResponse {
  classes: number[];
  indexed: number[];
}

export interface StatsResponse {
  n_rects: number;
  model_hash: string;
  leaf_capacity: number;
  build_seconds: number;
  indexes: Record<string, Record<string, number>>;
}

export type NormName = "l1" | "l2" | "linf";

export interface QueryBody {
  x: number[];
  target?: number | null;
  p?: NormName;
  weights?: number[] | null;
  frozen?: number[];
  eps?: number | null;
}

export interface Delta {
  feature: number;
  name: string;
  from: number;
  to: number;
  changed: boolean;
}

export interface Certificate {
  nodes_popped: number;
  nodes_pruned: number;
  rects_evaluated: number;
  final_popped_bound: number | null;
}

export interface QueryResponse {
  rect_id: number;
  x_cf: number[];
  distance: number;
  target: number;
  certificate: Certificate;
  deltas: Delta[];
}

export interface RasterBody {
  feature_x: number;
  feature_y: number;
  fixed_values?: number[] | null;
  nx: number;
  ny: number;
  p?: NormName;
  weights?: number[] | null;
  target: number;
}

export interface RasterResponse {
  region_ids: number[][];
  distances: number[][];
  legend: Record<string, number>;
  xs: number[];
  ys: number[];
}

export interface TransportResponse {
  status: number;
  json: unknown;
}

export type Transport = (
  method: "GET" | "POST",
  path: string,
  body?: unknown,
) => Promise<TransportResponse>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }

  /** A 422 from /query with a freeze in play means no admissible region. */
  get infeasible(): boolean {
    return this.status === 422;
  }
}

function detailOf(json: unknown): string {
  if (json && typeof json === "object" && "detail" in json) {
    const d = (json as { detail: unknown }).detail;
    return typeof d === "string" ? d : JSON.stringify(d);
  }
  return JSON.stringify(json);
}

export function fetchTransport(baseUrl: string): Transport {
  return async (method, path, body) => {
    const resp = await fetch(baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return { status: resp.status, json: await resp.json() };
  };
}

export class ApiClient {
  constructor(private readonly transport: Transport) {}

  private async call<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await this.transport(method, path, body);
    if (resp.status >= 400) {
      throw new ApiError(resp.status, detailOf(resp.json));
    }
    return resp.json as T;
  }

  schema(): Promise<SchemaResponse> {
    return this.call("GET", "/schema");
  }

  classes(): Promise<ClassesResponse> {
    return this.call("GET", "/classes");
  }

  stats(): Promise<StatsResponse> {
    return this.call("GET", "/stats");
  }

  query(body: QueryBody): Promise<QueryResponse> {
    return this.call("POST", "/query", body);
  }

  raster(body: RasterBody): Promise<RasterResponse> {
    return this.call("POST", "/raster", body);
  }
}
