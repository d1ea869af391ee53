"""Command-line entry points for the build and query pipelines.

Exit codes: 2 schema/format errors, 3 infeasible targets, 4 missing files,
1 anything else.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from .datasets import load_dataset
from .ensemble import load_model, save_model, train_forest
from .errors import (
    CfMapsError,
    DomainError,
    InfeasibleTargetError,
    InvalidTargetError,
    ModelFormatError,
    SchemaError,
)
from .geometry import NormSpec
from .query import QueryRequest, counterfactual
from .raster import RasterSpec, export_raster, rasterize
from .store import build_and_save, load_session

EXIT_SCHEMA = 2
EXIT_INFEASIBLE = 3
EXIT_MISSING = 4

NORMS = {"l1": 1.0, "l2": 2.0, "linf": math.inf}


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FileNotFoundError as exc:
        _fail(EXIT_MISSING, str(exc))
    except (InvalidTargetError, InfeasibleTargetError) as exc:
        _fail(EXIT_INFEASIBLE, str(exc))
    except (SchemaError, DomainError, ModelFormatError) as exc:
        _fail(EXIT_SCHEMA, str(exc))
    except CfMapsError as exc:
        _fail(1, str(exc))


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")], dtype=float)


@click.group()
def main():
    """Counterfactual maps for tree ensembles."""


@main.command()
@click.option("--dataset", required=True, help="bundled dataset name or path to a CSV with a trailing label column")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--n-trees", default=10, show_default=True)
@click.option("--max-depth", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--bootstrap/--no-bootstrap", default=True, show_default=True)
def train(dataset, out_path, n_trees, max_depth, seed, bootstrap):
    """Train a random forest and write the model document."""

    def run():
        if Path(dataset).exists():
            import csv as _csv

            with open(dataset) as f:
                rows = list(_csv.reader(f))
            names = rows[0][:-1]
            arr = np.array([[float(v) for v in r] for r in rows[1:]])
            X, y = arr[:, :-1], arr[:, -1].astype(np.int64)
            from .ensemble import schema_from_data

            schema = schema_from_data(X, names=names)
            classes = tuple(range(int(y.max()) + 1))
        else:
            X, y, schema, classes = load_dataset(dataset)
        e = train_forest(X, y, schema, classes, n_trees=n_trees,
                         max_depth=max_depth, seed=seed, bootstrap=bootstrap)
        Path(out_path).write_bytes(save_model(e))
        click.echo(f"wrote {out_path} ({n_trees} trees, depth <= {max_depth})")

    _guard(run)


@main.command("import-model")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="re-emit the validated model in canonical form")
def import_model(model_file, out_path):
    """Validate an external model document."""

    def run():
        path = Path(model_file)
        if not path.exists():
            raise FileNotFoundError(f"model file {model_file} not found")
        e = load_model(path.read_bytes())
        click.echo(f"ok: {len(e.trees)} trees, {e.schema.m} features, "
                   f"{e.n_classes} classes, hash {e.model_hash()[:12]}")
        if out_path:
            Path(out_path).write_bytes(save_model(e))

    _guard(run)


@main.command()
@click.option("--model", "model_file", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--leaf-capacity", default=8, show_default=True)
def build(model_file, out_dir, leaf_capacity):
    """Extract the partition, build per-class indexes, persist everything."""

    def run():
        path = Path(model_file)
        if not path.exists():
            raise FileNotFoundError(f"model file {model_file} not found")
        e = load_model(path.read_bytes())
        maps = build_and_save(e, out_dir, leaf_capacity=leaf_capacity)
        click.echo(json.dumps({
            "n_rects": maps.partition.n,
            "classes": sorted(maps.trees.keys()),
            "build_seconds": round(maps.build_seconds, 6),
            "out": str(out_dir),
        }))

    _guard(run)


def _norm_option(norm, weights):
    w = None if not weights else _parse_vector(weights)
    return NormSpec(p=NORMS[norm], weights=w)


@main.command()
@click.option("--dir", "session_dir", required=True, type=click.Path(file_okay=False))
@click.option("--x", "x_text", required=True, help="comma-separated coordinates")
@click.option("--target", default=None, type=int)
@click.option("--norm", default="l2", type=click.Choice(sorted(NORMS)), show_default=True)
@click.option("--weights", default=None, help="comma-separated positive weights")
@click.option("--frozen", default=None, help="comma-separated frozen feature indices")
@click.option("--eps", default=None, type=float)
def query(session_dir, x_text, target, norm, weights, frozen, eps):
    """Answer one counterfactual query; prints the result as JSON."""

    def run():
        maps = load_session(session_dir)
        req = QueryRequest(
            x=_parse_vector(x_text),
            target=target,
            norm=_norm_option(norm, weights),
            frozen=frozenset(int(v) for v in frozen.split(",")) if frozen else frozenset(),
            eps=eps,
        )
        res = counterfactual(maps, req)
        click.echo(json.dumps({
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
        }))

    _guard(run)


@main.command()
@click.option("--dir", "session_dir", required=True, type=click.Path(file_okay=False))
@click.option("--features", required=True, help="display pair, e.g. 0,1")
@click.option("--res", default="100x100", show_default=True)
@click.option("--target", required=True, type=int)
@click.option("--norm", default="l2", type=click.Choice(sorted(NORMS)), show_default=True)
@click.option("--weights", default=None)
@click.option("--fixed", default=None, help="fixed values for all features")
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json", "ppm"]), show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def raster(session_dir, features, res, target, norm, weights, fixed, fmt, out_path):
    """Rasterize a 2-D slice of the counterfactual map."""

    def run():
        maps = load_session(session_dir)
        fx, fy = (int(v) for v in features.split(","))
        nx, ny = (int(v) for v in res.split("x"))
        fixed_vals = (_parse_vector(fixed) if fixed
                      else 0.5 * (maps.partition.domain_lo + maps.partition.domain_hi))
        spec = RasterSpec(feature_x=fx, feature_y=fy, fixed_values=fixed_vals,
                          resolution=(nx, ny), norm=_norm_option(norm, weights),
                          target=target)
        data = export_raster(rasterize(maps, spec), fmt)
        if out_path:
            Path(out_path).write_bytes(data)
            click.echo(f"wrote {out_path}")
        else:
            sys.stdout.write(data.decode("utf-8", errors="replace"))

    _guard(run)


@main.group()
def bench():
    """Benchmark harness."""


@bench.command("run")
@click.option("--config", "config_file", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def bench_run(config_file, out_dir):
    """Run the benchmark grid from a JSON config; writes report.csv."""

    def run():
        path = Path(config_file)
        if not path.exists():
            raise FileNotFoundError(f"config file {config_file} not found")
        raw = json.loads(path.read_text())
        records = []
        for ds in raw.get("datasets", [raw.get("dataset", "blobs")]):
            cfg = bench_mod.BenchConfig(
                dataset=ds,
                n_trees_grid=tuple(raw.get("n_trees", (3, 5, 7, 10))),
                depth_grid=tuple(raw.get("depths", (3, 5))),
                n_queries=int(raw.get("n_queries", 1000)),
                seeds=tuple(raw.get("seeds", (0, 1, 2, 3, 4))),
                norms=tuple(raw.get("norms", ("l1", "l2", "linf"))),
                verify=bool(raw.get("verify", True)),
            )
            records.extend(bench_mod.run_benchmark(cfg))
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(bench_mod.emit_report(records))
        click.echo(f"wrote {out / 'report.csv'} ({len(records)} rows)")

    _guard(run)


@main.command()
@click.option("--dir", "session_dir", required=True, type=click.Path(file_okay=False))
@click.option("--host", default=None, help="bind address (or CFMAPS_HOST)")
@click.option("--port", default=None, type=int, help="port (or CFMAPS_PORT)")
def serve(session_dir, host, port):
    """Serve the HTTP API over a built session."""
    import os

    import uvicorn

    from .service import create_app

    def run():
        maps = load_session(session_dir)
        app = create_app(maps)
        uvicorn.run(app, host=host or os.environ.get("CFMAPS_HOST", "127.0.0.1"),
                    port=port or int(os.environ.get("CFMAPS_PORT", "8000")))

    _guard(run)


if __name__ == "__main__":
    main()
