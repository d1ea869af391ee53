"""Desk-scale benchmark harness: latency, amortization, and scaling trends.

Timings use the monotonic performance counter, exclude serialization and
oracle verification, and discard ten warm-up queries per configuration.
Absolute numbers are hardware-bound; only trends and optimality are targets.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .datasets import load_dataset
from .ensemble import train_forest
from .errors import SchemaError
from .geometry import NormSpec
from .maps import build_maps
from .partition import Hyperrectangle, Partition
from .query import linear_scan_oracle, nearest_region

NORM_NAMES = {"l1": 1.0, "l2": 2.0, "linf": float("inf")}

CSV_COLUMNS = [
    "dataset", "n_trees", "depth", "seed", "norm", "n_rects",
    "t0_s", "mean_q_ms", "p50_q_ms", "p95_q_ms", "mean_rects_eval", "error_ratio",
]

WARMUP_QUERIES = 10


@dataclass
class BenchConfig:
    dataset: str
    n_trees_grid: tuple = (3, 5, 7, 10)
    depth_grid: tuple = (3, 5)
    n_queries: int = 1000
    seeds: tuple = (0, 1, 2, 3, 4)
    norms: tuple = ("l1", "l2", "linf")
    leaf_capacity: int = 8
    verify: bool = True

    def __post_init__(self):
        if not self.n_trees_grid or not self.depth_grid:
            raise SchemaError("empty benchmark grid")
        if min(self.n_trees_grid) < 1 or min(self.depth_grid) < 1:
            raise SchemaError("grid values must be positive")
        if self.n_queries < 1:
            raise SchemaError("n_queries must be positive")
        if len(set(self.seeds)) != len(self.seeds):
            raise SchemaError("seeds must be distinct")


@dataclass
class BenchRecord:
    dataset: str
    n_trees: int
    depth: int
    seed: int
    norm: str
    n_rects: int
    t0_s: float
    latencies_s: np.ndarray = field(repr=False)
    rects_evaluated: np.ndarray = field(repr=False)
    error_ratio: float = float("nan")
    failures: int = 0

    @property
    def mean_q_ms(self) -> float:
        return float(np.mean(self.latencies_s) * 1e3)

    @property
    def p50_q_ms(self) -> float:
        return float(np.percentile(self.latencies_s, 50) * 1e3)

    @property
    def p95_q_ms(self) -> float:
        return float(np.percentile(self.latencies_s, 95) * 1e3)

    @property
    def mean_rects_eval(self) -> float:
        return float(np.mean(self.rects_evaluated))

    def total_time(self, q: int) -> float:
        """Cumulative cost of preprocessing plus the first q queries."""
        return self.t0_s + float(np.sum(self.latencies_s[:q]))


def _query_points(X, schema, n_queries: int, seed: int) -> np.ndarray:
    """Test points drawn uniformly from the dataset, topped up with uniform
    samples of the domain box when the dataset is too small."""
    rng = np.random.default_rng(seed)
    take = min(n_queries, X.shape[0])
    idx = rng.choice(X.shape[0], size=take, replace=False)
    pts = X[idx]
    if take < n_queries:
        extra = rng.uniform(schema.domain_lo, schema.domain_hi,
                            size=(n_queries - take, schema.m))
        pts = np.vstack([pts, extra])
    # nudge inside the open domain padding so every point is strictly in-domain
    return np.clip(pts, schema.domain_lo, schema.domain_hi)


def run_benchmark(cfg: BenchConfig) -> list:
    X, y, schema, classes = load_dataset(cfg.dataset)
    records = []
    for n_trees in cfg.n_trees_grid:
        for depth in cfg.depth_grid:
            for seed in cfg.seeds:
                t_start = time.perf_counter()
                e = train_forest(X, y, schema, classes, n_trees=n_trees,
                                 max_depth=depth, seed=seed)
                maps = build_maps(e, leaf_capacity=cfg.leaf_capacity)
                t0 = time.perf_counter() - t_start
                pts = _query_points(X, schema, cfg.n_queries + WARMUP_QUERIES, seed)
                for norm_name in cfg.norms:
                    norm = NormSpec(p=NORM_NAMES[norm_name])
                    rec = _run_queries(maps, e, pts, norm, cfg)
                    records.append(BenchRecord(
                        dataset=cfg.dataset, n_trees=n_trees, depth=depth,
                        seed=seed, norm=norm_name, n_rects=maps.partition.n,
                        t0_s=t0, **rec,
                    ))
    return records


def _run_queries(maps, e, pts, norm, cfg) -> dict:
    latencies = []
    rects_eval = []
    ratios = []
    for i, x in enumerate(pts):
        pred = e.predict(x)
        targets = [c for c in maps.classes if c != pred]
        if not targets:
            continue
        target = targets[0]
        tree = maps.trees[target]
        t_q = time.perf_counter()
        rid, d, cert = nearest_region(tree, x, norm)
        dt = time.perf_counter() - t_q
        if i < WARMUP_QUERIES:
            continue
        latencies.append(dt)
        rects_eval.append(cert.rects_evaluated)
        if cfg.verify:
            _, d_opt = linear_scan_oracle(maps.partition, target, x, norm)
            ratios.append(1.0 if d == d_opt == 0.0 else d / d_opt if d_opt > 0 else 1.0)
    return {
        "latencies_s": np.array(latencies),
        "rects_evaluated": np.array(rects_eval),
        "error_ratio": float(np.mean(ratios)) if ratios else float("nan"),
        "failures": 0,
    }


def emit_report(records: list) -> str:
    """Stable-order CSV, one row per (dataset, n_trees, depth, seed, norm)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([
            r.dataset, r.n_trees, r.depth, r.seed, r.norm, r.n_rects,
            f"{r.t0_s:.6f}", f"{r.mean_q_ms:.6f}", f"{r.p50_q_ms:.6f}",
            f"{r.p95_q_ms:.6f}", f"{r.mean_rects_eval:.3f}",
            "" if np.isnan(r.error_ratio) else f"{r.error_ratio:.6f}",
        ])
    return buf.getvalue()


def random_rectangles(n: int, m: int = 4, seed: int = 0, label: int = 0):
    """Synthetic rectangle family in [0, 1]^m for scaling studies."""
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0.0, 1.0, size=(n, m))
    width = rng.uniform(1e-4, 0.5 / max(n ** (1.0 / m), 1.0), size=(n, m))
    hi = np.minimum(lo + width, 1.0)
    lo = np.minimum(lo, hi - 1e-9)
    rects = [
        Hyperrectangle(id=i, label=label, lo=lo[i], hi=hi[i],
                       hi_closed=np.ones(m, dtype=bool))
        for i in range(n)
    ]
    return Partition(rects=rects, domain_lo=np.zeros(m), domain_hi=np.ones(m),
                     n_classes=label + 1, model_hash="synthetic")
