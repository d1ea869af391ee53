/** Browser entry point: builds the form, result panel, and heatmap canvas,
 * and wires them to the controller. All numbers shown come straight from
 * service responses. */

import { ApiClient, fetchTransport } from "./api";
import type { QueryResponse, RasterResponse } from "./api";
import { ExplorerController } from "./explorer";
import { certificateSummary, deltaRows, resultSummary } from "./format";
import { HeatmapModel, cssColor } from "./heatmap";
import { decodeState, defaultState } from "./state";

async function install(): Promise<void> {
  const app = document.querySelector("#app");
  if (!app) return;

  const api = new ApiClient(fetchTransport(""));
  const schema = await api.schema();
  const classes = await api.classes();
  const m = schema.features.length;

  const state = window.location.search.length > 1
    ? decodeState(window.location.search.slice(1))
    : defaultState(m);

  const form = document.createElement("div");
  const result = document.createElement("pre");
  const table = document.createElement("table");
  const status = document.createElement("p");
  const canvas = document.createElement("canvas");
  const hover = document.createElement("p");
  app.append(form, result, table, status, canvas, hover);

  let model: HeatmapModel | null = null;

  const view = {
    showResult(r: QueryResponse): void {
      result.textContent =
        resultSummary(r) + "\n" + certificateSummary(r.certificate);
      table.innerHTML = "";
      for (const row of deltaRows(r.deltas)) {
        const tr = document.createElement("tr");
        for (const cell of [row.name, row.from, row.to, row.delta]) {
          const td = document.createElement("td");
          td.textContent = cell;
          tr.appendChild(td);
        }
        if (row.changed) tr.style.fontWeight = "bold";
        table.appendChild(tr);
      }
      status.textContent = "";
    },
    showRaster(r: RasterResponse): void {
      model = new HeatmapModel(r);
      const [ny, nx] = model.shape;
      canvas.width = nx * 6;
      canvas.height = ny * 6;
      const g = canvas.getContext("2d");
      if (!g) return;
      for (let iy = 0; iy < ny; iy++) {
        for (let ix = 0; ix < nx; ix++) {
          g.fillStyle = cssColor(model.colorAt(ix, iy));
          g.fillRect(ix * 6, (ny - 1 - iy) * 6, 6, 6);
        }
      }
      const cell = model.cellOf(
        controller.state.x[controller.state.featureX],
        controller.state.x[controller.state.featureY],
      );
      if (cell) {
        g.fillStyle = "black";
        g.fillRect(cell[0] * 6 + 2, (ny - 1 - cell[1]) * 6 + 2, 2, 2);
      }
    },
    showQueryError(message: string, infeasible: boolean): void {
      status.textContent = infeasible
        ? `No counterfactual exists under the current freezes: ${message}`
        : message;
    },
    showRasterError(message: string): void {
      hover.textContent = `map unavailable: ${message}`;
    },
    urlChanged(query: string): void {
      window.history.replaceState(null, "", "?" + query);
    },
  };

  const controller = new ExplorerController(api, state, view);

  for (let j = 0; j < m; j++) {
    const f = schema.features[j];
    const label = document.createElement("label");
    label.textContent = f.name;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(f.lo);
    slider.max = String(f.hi);
    slider.step = String((f.hi - f.lo) / 200);
    slider.value = String(state.x[j]);
    slider.oninput = () => {
      const x = [...controller.state.x];
      x[j] = Number(slider.value);
      controller.update({ x });
    };
    const freeze = document.createElement("input");
    freeze.type = "checkbox";
    freeze.checked = state.frozen.includes(j);
    freeze.onchange = () => controller.toggleFreeze(j);
    form.append(label, slider, freeze);
  }

  const targetSel = document.createElement("select");
  for (const c of [null, ...classes.classes]) {
    const opt = document.createElement("option");
    opt.value = c === null ? "" : String(c);
    opt.textContent = c === null ? "nearest other class" : `class ${c}`;
    targetSel.appendChild(opt);
  }
  targetSel.onchange = () =>
    controller.update({
      target: targetSel.value === "" ? null : Number(targetSel.value),
    });
  const normSel = document.createElement("select");
  for (const n of ["l1", "l2", "linf"] as const) {
    const opt = document.createElement("option");
    opt.value = n;
    opt.textContent = n;
    if (n === state.norm) opt.selected = true;
    normSel.appendChild(opt);
  }
  normSel.onchange = () =>
    controller.update({ norm: normSel.value as "l1" | "l2" | "linf" });
  form.append(targetSel, normSel);

  canvas.onmousemove = (ev) => {
    if (!model) return;
    const [ny] = model.shape;
    const ix = Math.floor(ev.offsetX / 6);
    const iy = ny - 1 - Math.floor(ev.offsetY / 6);
    const [h, w] = model.shape;
    if (ix < 0 || iy < 0 || ix >= w || iy >= h) return;
    const info = model.hover(ix, iy);
    hover.textContent =
      `region ${info.rectId} (class ${info.classLabel}) at ` +
      `(${info.cx.toPrecision(4)}, ${info.cy.toPrecision(4)}), ` +
      `distance ${info.distance.toPrecision(6)}`;
  };

  await controller.refresh();
}

void install();
