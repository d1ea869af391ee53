/** UI-agnostic controller: owns the state, debounces re-queries, keeps a
 * single query in flight per panel, and discards stale responses. */

import { ApiClient, ApiError } from "./api";
import type { QueryResponse, RasterResponse } from "./api";
import {
  ExplorerState,
  encodeState,
  queryBodyOf,
  rasterBodyOf,
} from "./state";

export interface ExplorerView {
  showResult(r: QueryResponse): void;
  showRaster(r: RasterResponse): void;
  showQueryError(message: string, infeasible: boolean): void;
  showRasterError(message: string): void;
  urlChanged(query: string): void;
}

export const DEBOUNCE_MS = 300;

type Scheduler = (fn: () => void, ms: number) => unknown;

export class ExplorerController {
  private timer: unknown = null;
  private querySeq = 0;
  private rasterSeq = 0;
  lastResult: QueryResponse | null = null;

  constructor(
    private readonly api: ApiClient,
    public state: ExplorerState,
    private readonly view: ExplorerView,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
    private readonly cancel: (h: unknown) => void = (h) =>
      clearTimeout(h as ReturnType<typeof setTimeout>),
  ) {}

  /** Apply a state change from a slider/toggle; re-query after the
   * debounce window so drags do not flood the service. */
  update(patch: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...patch };
    this.view.urlChanged(encodeState(this.state));
    if (this.timer !== null) this.cancel(this.timer);
    this.timer = this.schedule(() => {
      this.timer = null;
      void this.refresh();
    }, DEBOUNCE_MS);
  }

  toggleFreeze(feature: number): void {
    const frozen = this.state.frozen.includes(feature)
      ? this.state.frozen.filter((f) => f !== feature)
      : [...this.state.frozen, feature].sort((a, b) => a - b);
    this.update({ frozen });
  }

  /** Fire both panels now (used on load and by tests); superseded
   * responses are dropped by sequence number. */
  async refresh(): Promise<void> {
    await Promise.all([this.runQuery(), this.runRaster()]);
  }

  private async runQuery(): Promise<void> {
    const seq = ++this.querySeq;
    try {
      const r = await this.api.query(queryBodyOf(this.state));
      if (seq !== this.querySeq) return; // superseded while in flight
      this.lastResult = r;
      this.view.showResult(r);
    } catch (err) {
      if (seq !== this.querySeq) return;
      if (err instanceof ApiError) {
        this.view.showQueryError(err.detail, err.infeasible);
      } else {
        this.view.showQueryError(String(err), false);
      }
    }
  }

  private async runRaster(): Promise<void> {
    const target = this.state.target ?? this.lastResult?.target ?? null;
    if (target === null) return; // nothing to draw until a class is known
    const seq = ++this.rasterSeq;
    try {
      const r = await this.api.raster(rasterBodyOf(this.state, target));
      if (seq !== this.rasterSeq) return;
      this.view.showRaster(r);
    } catch (err) {
      if (seq !== this.rasterSeq) return;
      // raster failure must not disturb the result panel
      this.view.showRasterError(
        err instanceof ApiError ? err.detail : String(err),
      );
    }
  }
}
