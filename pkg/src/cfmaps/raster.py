"""2-D slices of a counterfactual map rasterized to nearest-region grids.

Each cell is evaluated at its center with the same search and tie rule as
single queries, making the generalized Voronoi cells of the target class's
rectangles visible without any symbolic bisector construction.
"""

from __future__ import annotations

import colorsys
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleTargetError, SchemaError
from .geometry import NormSpec
from .maps import CounterfactualMaps
from .query import nearest_region


@dataclass
class RasterSpec:
    feature_x: int
    feature_y: int
    fixed_values: np.ndarray
    resolution: tuple = (100, 100)
    norm: NormSpec = field(default_factory=NormSpec)
    target: int = 0


@dataclass
class RasterResult:
    region_ids: np.ndarray  # (ny, nx) int
    distances: np.ndarray   # (ny, nx) float
    legend: dict            # rect id -> class label
    xs: np.ndarray          # cell-center coordinates along feature_x
    ys: np.ndarray


def cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    step = (hi - lo) / n
    return lo + step * (np.arange(n) + 0.5)


def rasterize(maps: CounterfactualMaps, spec: RasterSpec) -> RasterResult:
    m = maps.m
    nx, ny = spec.resolution
    if nx < 2 or ny < 2:
        raise SchemaError("raster resolution must be at least 2x2")
    fx, fy = spec.feature_x, spec.feature_y
    if not (0 <= fx < m and 0 <= fy < m) or fx == fy:
        raise SchemaError(f"invalid display feature pair ({fx}, {fy})")
    tree = maps.tree_for(spec.target)
    if tree is None:
        raise InfeasibleTargetError(f"class {spec.target} has no regions")
    dom_lo, dom_hi = maps.partition.domain_lo, maps.partition.domain_hi
    fixed = np.asarray(spec.fixed_values, dtype=float)
    if fixed.shape != (m,):
        raise SchemaError(f"fixed_values must have length {m}")
    if np.any(fixed < dom_lo) or np.any(fixed > dom_hi):
        raise SchemaError("fixed_values outside the domain box")
    xs = cell_centers(dom_lo[fx], dom_hi[fx], nx)
    ys = cell_centers(dom_lo[fy], dom_hi[fy], ny)
    region_ids = np.empty((ny, nx), dtype=np.int64)
    distances = np.empty((ny, nx), dtype=float)
    x = fixed.copy()
    for iy, cy in enumerate(ys):
        for ix, cx in enumerate(xs):
            x[fx] = cx
            x[fy] = cy
            rid, d, _ = nearest_region(tree, x, spec.norm)
            region_ids[iy, ix] = rid
            distances[iy, ix] = d
    legend = {
        int(r.id): int(r.label)
        for r in maps.partition.rects
        if r.id in set(np.unique(region_ids).tolist())
    }
    return RasterResult(region_ids=region_ids, distances=distances,
                        legend=legend, xs=xs, ys=ys)


def region_color(rect_id: int) -> tuple:
    """Deterministic distinct-ish RGB color keyed by region id."""
    hue = (rect_id * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.95)
    return int(r * 255), int(g * 255), int(b * 255)


def export_raster(r: RasterResult, fmt: str) -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ix", "iy", "cx", "cy", "rect_id", "distance"])
        ny, nx = r.region_ids.shape
        for iy in range(ny):
            for ix in range(nx):
                w.writerow([ix, iy, repr(float(r.xs[ix])), repr(float(r.ys[iy])),
                            int(r.region_ids[iy, ix]), repr(float(r.distances[iy, ix]))])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {
            "region_ids": r.region_ids.tolist(),
            "distances": r.distances.tolist(),
            "legend": {str(k): v for k, v in r.legend.items()},
            "xs": r.xs.tolist(),
            "ys": r.ys.tolist(),
        }
        return json.dumps(doc, sort_keys=True).encode("utf-8")
    if fmt == "ppm":
        ny, nx = r.region_ids.shape
        lines = [f"P3 {nx} {ny} 255"]
        for iy in range(ny):
            row = []
            for ix in range(nx):
                row.extend(str(v) for v in region_color(int(r.region_ids[iy, ix])))
            lines.append(" ".join(row))
        return ("\n".join(lines) + "\n").encode("ascii")
    raise SchemaError(f"unsupported raster format {fmt!r}; use csv, json or ppm")


def import_raster_csv(data: bytes) -> RasterResult:
    """Inverse of the CSV export (lossless round trip)."""
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    header, rows = rows[0], rows[1:]
    if header != ["ix", "iy", "cx", "cy", "rect_id", "distance"]:
        raise SchemaError("unexpected raster CSV header")
    nx = max(int(r[0]) for r in rows) + 1
    ny = max(int(r[1]) for r in rows) + 1
    region_ids = np.zeros((ny, nx), dtype=np.int64)
    distances = np.zeros((ny, nx), dtype=float)
    xs = np.zeros(nx)
    ys = np.zeros(ny)
    for r in rows:
        ix, iy = int(r[0]), int(r[1])
        xs[ix] = float(r[2])
        ys[iy] = float(r[3])
        region_ids[iy, ix] = int(r[4])
        distances[iy, ix] = float(r[5])
    return RasterResult(region_ids=region_ids, distances=distances,
                        legend={}, xs=xs, ys=ys)
