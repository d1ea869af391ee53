"""On-disk layout of a built session: model, partition, per-class indexes."""

from __future__ import annotations

import json
from pathlib import Path

from .cfindex import load_index, save_index
from .ensemble import Ensemble, load_model, save_model
from .errors import ModelFormatError
from .maps import CounterfactualMaps, build_maps
from .partition import load_partition, save_partition

META_NAME = "meta.json"


def save_session(maps: CounterfactualMaps, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if maps.ensemble is not None:
        (out / "model.json").write_bytes(save_model(maps.ensemble))
    (out / "partition.json").write_bytes(save_partition(maps.partition))
    idx_dir = out / "indexes"
    idx_dir.mkdir(exist_ok=True)
    for label, tree in maps.trees.items():
        (idx_dir / f"{label}.json").write_bytes(save_index(tree))
    meta = {
        "version": 1,
        "model_hash": maps.partition.model_hash,
        "leaf_capacity": maps.leaf_capacity,
        "classes": sorted(maps.trees.keys()),
        "n_rects": maps.partition.n,
        "build_seconds": maps.build_seconds,
    }
    (out / META_NAME).write_text(json.dumps(meta, indent=2, sort_keys=True))


def load_session(in_dir: str | Path) -> CounterfactualMaps:
    d = Path(in_dir)
    meta_path = d / META_NAME
    if not meta_path.exists():
        raise FileNotFoundError(f"no built session at {d}: missing {META_NAME}")
    meta = json.loads(meta_path.read_text())
    if meta.get("version") != 1:
        raise ModelFormatError(f"unknown session version {meta.get('version')!r}")
    ensemble: Ensemble | None = None
    model_path = d / "model.json"
    if model_path.exists():
        ensemble = load_model(model_path.read_bytes())
    partition = load_partition((d / "partition.json").read_bytes())
    trees = {}
    for label in meta["classes"]:
        trees[int(label)] = load_index((d / "indexes" / f"{label}.json").read_bytes())
    return CounterfactualMaps(
        partition=partition, trees=trees, ensemble=ensemble,
        leaf_capacity=int(meta["leaf_capacity"]),
        build_seconds=float(meta.get("build_seconds", 0.0)),
    )


def build_and_save(e: Ensemble, out_dir: str | Path, leaf_capacity: int = 8):
    maps = build_maps(e, leaf_capacity=leaf_capacity)
    save_session(maps, out_dir)
    return maps
