"""Bundled desk-scale datasets and the synthetic blobs generator.

Bundled sets are small UCI tabular classics (iris; breast-cancer diagnostic
restricted to its first eight mean features). They exist so benchmarks and
fixtures run offline; absolute timings on them are not comparable to any
external hardware-bound figures.
"""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from .ensemble import FeatureSchema, schema_from_data
from .errors import SchemaError

BUNDLED = ("iris", "wdbc8")


def make_blobs(n: int = 300, m: int = 2, n_classes: int = 3, seed: int = 0,
               spread: float = 1.0):
    """Gaussian clusters, one per class; the classic synthetic fixture."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-5.0, 5.0, size=(n_classes, m))
    per = [n // n_classes + (1 if i < n % n_classes else 0) for i in range(n_classes)]
    X = np.vstack([
        centers[i] + rng.normal(0.0, spread, size=(per[i], m))
        for i in range(n_classes)
    ])
    y = np.concatenate([np.full(per[i], i, dtype=np.int64) for i in range(n_classes)])
    return X, y


def _read_bundled_csv(name: str):
    path = resources.files("cfmaps").joinpath("data", f"{name}.csv")
    with path.open("r", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    arr = np.asarray(rows, dtype=float)
    return header[:-1], arr[:, :-1], arr[:, -1].astype(np.int64)


def load_dataset(name: str, seed: int = 0):
    """Return (X, y, schema, class labels) for a bundled or synthetic dataset.

    Synthetic names: "blobs" (2 features, 3 classes) and "blobs<m>d" for an
    m-feature variant.
    """
    if name in BUNDLED:
        names, X, y = _read_bundled_csv(name)
        schema = schema_from_data(X, names=names)
        return X, y, schema, tuple(range(int(y.max()) + 1))
    if name == "blobs" or (name.startswith("blobs") and name.endswith("d")):
        m = 2 if name == "blobs" else int(name[5:-1])
        X, y = make_blobs(n=300, m=m, n_classes=3, seed=seed)
        schema = schema_from_data(X)
        return X, y, schema, (0, 1, 2)
    raise SchemaError(f"unknown dataset {name!r}; available: {BUNDLED + ('blobs',)}")


def dataset_schema(name: str) -> FeatureSchema:
    return load_dataset(name)[2]
