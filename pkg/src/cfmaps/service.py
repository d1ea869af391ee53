"""HTTP service over one built session.

All query endpoints read immutable state; replacing the session swaps a
single reference, so concurrent readers see either the old or the new build.
"""

from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .errors import (
    DomainError,
    InfeasibleTargetError,
    InvalidTargetError,
    SchemaError,
)
from .geometry import NormSpec
from .maps import CounterfactualMaps
from .cfindex import index_stats
from .query import QueryRequest, counterfactual
from .raster import RasterSpec, rasterize


def _parse_p(p: Union[float, str, None]) -> float:
    if p is None:
        return 2.0
    if isinstance(p, str):
        name = p.lower().lstrip("l")
        if name in ("inf", "infinity", "∞"):
            return math.inf
        try:
            return float(name)
        except ValueError as exc:
            raise SchemaError(f"unknown norm {p!r}") from exc
    return float(p)


class QueryBody(BaseModel):
    x: list[float]
    target: Optional[int] = None
    p: Union[float, str, None] = 2
    weights: Optional[list[float]] = None
    frozen: Optional[list[int]] = None
    eps: Optional[float] = None


class RasterBody(BaseModel):
    feature_x: int
    feature_y: int
    fixed_values: Optional[list[float]] = None
    nx: int = Field(default=100, ge=2)
    ny: int = Field(default=100, ge=2)
    p: Union[float, str, None] = 2
    weights: Optional[list[float]] = None
    target: int


class SessionHolder:
    """Atomic reference to the currently served build."""

    def __init__(self, maps: Optional[CounterfactualMaps] = None):
        self.maps = maps

    def replace(self, maps: CounterfactualMaps) -> None:
        self.maps = maps

    def require(self) -> CounterfactualMaps:
        if self.maps is None:
            raise HTTPException(status_code=409, detail="session not built")
        return self.maps


def create_app(maps: Optional[CounterfactualMaps] = None) -> FastAPI:
    app = FastAPI(title="cfmaps", version="0.1.0")
    holder = SessionHolder(maps)
    app.state.holder = holder

    @app.get("/schema")
    def get_schema():
        m = holder.require()
        if m.ensemble is None:
            raise HTTPException(status_code=409, detail="session has no model attached")
        return {
            "features": [
                {"name": f.name, "kind": f.kind, "lo": f.lo, "hi": f.hi}
                for f in m.ensemble.schema.features
            ]
        }

    @app.get("/classes")
    def get_classes():
        m = holder.require()
        classes = list(m.ensemble.classes) if m.ensemble else sorted(m.trees.keys())
        return {"classes": classes, "indexed": sorted(m.trees.keys())}

    @app.get("/stats")
    def get_stats():
        m = holder.require()
        per_class = {
            str(label): {
                "n_rects": t.n_rects,
                **index_stats(t).__dict__,
            }
            for label, t in m.trees.items()
        }
        return {
            "n_rects": m.partition.n,
            "model_hash": m.partition.model_hash,
            "leaf_capacity": m.leaf_capacity,
            "build_seconds": m.build_seconds,
            "indexes": per_class,
        }

    @app.post("/query")
    def post_query(body: QueryBody):
        m = holder.require()
        try:
            norm = NormSpec(p=_parse_p(body.p),
                            weights=None if body.weights is None else body.weights)
            req = QueryRequest(
                x=np.asarray(body.x, dtype=float),
                target=body.target,
                norm=norm,
                frozen=frozenset(body.frozen or ()),
                eps=body.eps,
            )
            res = counterfactual(m, req)
        except (InvalidTargetError, InfeasibleTargetError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except (SchemaError, DomainError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        x = np.asarray(body.x, dtype=float)
        names = ([f.name for f in m.ensemble.schema.features]
                 if m.ensemble else [f"f{j}" for j in range(m.m)])
        deltas = [
            {
                "feature": j,
                "name": names[j],
                "from": float(x[j]),
                "to": float(res.x_cf[j]),
                "changed": bool(res.x_cf[j] != x[j]),
            }
            for j in range(len(x))
        ]
        return {
            "rect_id": res.rect_id,
            "x_cf": [float(v) for v in res.x_cf],
            "distance": res.distance,
            "target": res.target,
            "certificate": {
                "nodes_popped": res.certificate.nodes_popped,
                "nodes_pruned": res.certificate.nodes_pruned,
                "rects_evaluated": res.certificate.rects_evaluated,
                "final_popped_bound": res.certificate.final_popped_bound,
            },
            "deltas": deltas,
        }

    @app.post("/raster")
    def post_raster(body: RasterBody):
        m = holder.require()
        try:
            fixed = (np.asarray(body.fixed_values, dtype=float)
                     if body.fixed_values is not None
                     else 0.5 * (m.partition.domain_lo + m.partition.domain_hi))
            spec = RasterSpec(
                feature_x=body.feature_x,
                feature_y=body.feature_y,
                fixed_values=fixed,
                resolution=(body.nx, body.ny),
                norm=NormSpec(p=_parse_p(body.p),
                              weights=None if body.weights is None else body.weights),
                target=body.target,
            )
            r = rasterize(m, spec)
        except InfeasibleTargetError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except (SchemaError, DomainError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "region_ids": r.region_ids.tolist(),
            "distances": r.distances.tolist(),
            "legend": {str(k): v for k, v in r.legend.items()},
            "xs": r.xs.tolist(),
            "ys": r.ys.tolist(),
        }

    return app
