/** Presentation helpers: every displayed number comes verbatim from a
 * service response — no client-side recomputation of distances. */

import type { Certificate, Delta, QueryResponse } from "./api";

export interface DeltaRow {
  name: string;
  from: string;
  to: string;
  delta: string;
  changed: boolean;
}

export function formatNumber(v: number, digits = 4): string {
  if (Number.isInteger(v) && Math.abs(v) < 1e15) return String(v);
  return v.toPrecision(digits);
}

export function deltaRows(deltas: Delta[], digits = 4): DeltaRow[] {
  return deltas.map((d) => ({
    name: d.name,
    from: formatNumber(d.from, digits),
    to: formatNumber(d.to, digits),
    delta: d.changed ? formatNumber(d.to - d.from, digits) : "—",
    changed: d.changed,
  }));
}

export function resultSummary(r: QueryResponse): string {
  const changed = r.deltas.filter((d) => d.changed).length;
  return (
    `class ${r.target} reachable at distance ${formatNumber(r.distance, 6)} ` +
    `(region ${r.rect_id}, ${changed} feature${changed === 1 ? "" : "s"} changed)`
  );
}

export function certificateSummary(c: Certificate): string {
  const bound =
    c.final_popped_bound === null
      ? "search exhausted"
      : `stopped at bound ${formatNumber(c.final_popped_bound, 6)}`;
  return (
    `${c.rects_evaluated} regions evaluated, ` +
    `${c.nodes_popped} nodes visited, ${c.nodes_pruned} pruned; ${bound}`
  );
}
