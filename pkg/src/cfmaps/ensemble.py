"""Decision-tree ensembles: representation, desk-scale training, JSON I/O.

Routing convention is fixed once for the whole package: an internal node
sends x to its left child iff x[feature] <= threshold. All hyperrectangle
side-openness downstream derives from this rule.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ModelFormatError, SchemaError

FEATURE_KINDS = ("continuous", "binary", "ordinal")


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise SchemaError(f"unknown feature kind {self.kind!r}")
        if not (self.lo < self.hi):
            raise SchemaError(f"feature {self.name!r}: lo must be < hi")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if not self.features:
            raise SchemaError("schema needs at least one feature")

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def domain_lo(self) -> np.ndarray:
        return np.array([f.lo for f in self.features], dtype=float)

    @property
    def domain_hi(self) -> np.ndarray:
        return np.array([f.hi for f in self.features], dtype=float)

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,):
            raise SchemaError(f"point has shape {x.shape}, expected ({self.m},)")
        if np.any(x < self.domain_lo) or np.any(x > self.domain_hi):
            raise DomainError("point lies outside the schema's domain box")
        return x


class TreeNode:
    """Either an internal split node or a leaf with a class-vote vector."""

    __slots__ = ("feature", "threshold", "left", "right", "votes")

    def __init__(self, feature=-1, threshold=0.0, left=None, right=None, votes=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.votes = None if votes is None else np.asarray(votes, dtype=float)

    @property
    def is_leaf(self) -> bool:
        return self.votes is not None

    @staticmethod
    def leaf(votes) -> "TreeNode":
        return TreeNode(votes=votes)

    @staticmethod
    def split(feature, threshold, left, right) -> "TreeNode":
        return TreeNode(feature=feature, threshold=threshold, left=left, right=right)


class FlatTree:
    """Array view of one tree: leaf boxes in DFS order plus internal-node
    descendant-leaf ranges, used by the partition extractor."""

    def __init__(self, root: TreeNode, schema: FeatureSchema):
        m = schema.m
        leaf_lo, leaf_hi, leaf_cls = [], [], []
        int_feat, int_thr, int_start, int_end = [], [], [], []

        def walk(node, lo, hi):
            if node.is_leaf:
                leaf_lo.append(lo.copy())
                leaf_hi.append(hi.copy())
                leaf_cls.append(int(np.argmax(node.votes)))
                return
            f, t = node.feature, node.threshold
            start = len(leaf_cls)
            hi_l = hi.copy(); hi_l[f] = min(hi[f], t)
            lo_r = lo.copy(); lo_r[f] = max(lo[f], t)
            walk(node.left, lo, hi_l)
            walk(node.right, lo_r, hi)
            int_feat.append(f)
            int_thr.append(t)
            int_start.append(start)
            int_end.append(len(leaf_cls))

        walk(root, schema.domain_lo, schema.domain_hi)
        self.leaf_lo = np.array(leaf_lo).reshape(-1, m)
        self.leaf_hi = np.array(leaf_hi).reshape(-1, m)
        self.leaf_cls = np.array(leaf_cls, dtype=np.int64)
        self.int_feat = np.array(int_feat, dtype=np.int64)
        self.int_thr = np.array(int_thr, dtype=float)
        self.int_start = np.array(int_start, dtype=np.int64)
        self.int_end = np.array(int_end, dtype=np.int64)
        self.n_leaves = len(leaf_cls)


@dataclass
class Ensemble:
    schema: FeatureSchema
    classes: tuple
    trees: list
    _flat: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.classes) < 1:
            raise SchemaError("ensemble needs at least one class")
        if not self.trees:
            raise SchemaError("ensemble needs at least one tree")
        self.classes = tuple(self.classes)
        for root in self.trees:
            self._validate_tree(root)

    def _validate_tree(self, node: TreeNode) -> None:
        if node.is_leaf:
            if len(node.votes) != self.n_classes:
                raise SchemaError("leaf vote vector length != class count")
            if np.any(node.votes < 0) or not np.any(node.votes > 0):
                raise SchemaError("leaf votes must be nonnegative with one positive")
            return
        if not (0 <= node.feature < self.schema.m):
            raise SchemaError(f"split feature index {node.feature} out of range")
        f = self.schema.features[node.feature]
        if not (f.lo < node.threshold < f.hi):
            raise SchemaError(
                f"threshold {node.threshold} not strictly inside [{f.lo}, {f.hi}]"
            )
        self._validate_tree(node.left)
        self._validate_tree(node.right)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def m(self) -> int:
        return self.schema.m

    def flat_trees(self) -> list:
        if self._flat is None:
            self._flat = [FlatTree(t, self.schema) for t in self.trees]
        return self._flat

    def predict(self, x) -> int:
        """Majority vote over per-tree leaf argmax; ties go to the lowest index."""
        x = self.schema.check_point(x)
        votes = np.zeros(self.n_classes, dtype=np.int64)
        for root in self.trees:
            node = root
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            votes[int(np.argmax(node.votes))] += 1
        return int(np.argmax(votes))

    def predict_batch(self, X) -> np.ndarray:
        """Vectorized majority vote for an (n, m) array of in-domain points."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.m:
            raise SchemaError(f"expected (n, {self.m}) array, got {X.shape}")
        n = X.shape[0]
        votes = np.zeros((n, self.n_classes), dtype=np.int64)
        cls_out = np.empty(n, dtype=np.int64)
        for root in self.trees:
            self._route(root, X, np.arange(n), cls_out)
            np.add.at(votes, (np.arange(n), cls_out), 1)
        return np.argmax(votes, axis=1)

    @classmethod
    def _route(cls, node: TreeNode, X, idx, out) -> None:
        if node.is_leaf:
            out[idx] = int(np.argmax(node.votes))
            return
        mask = X[idx, node.feature] <= node.threshold
        cls._route(node.left, X, idx[mask], out)
        cls._route(node.right, X, idx[~mask], out)

    def save(self) -> bytes:
        return json.dumps(self.to_doc(), sort_keys=True).encode("utf-8")

    def to_doc(self) -> dict:
        def node_doc(n):
            if n.is_leaf:
                return {"votes": [float(v) for v in n.votes]}
            return {
                "feature": int(n.feature),
                "threshold": float(n.threshold),
                "left": node_doc(n.left),
                "right": node_doc(n.right),
            }

        return {
            "version": 1,
            "schema": {
                "features": [
                    {"name": f.name, "kind": f.kind, "lo": f.lo, "hi": f.hi}
                    for f in self.schema.features
                ]
            },
            "classes": list(self.classes),
            "trees": [node_doc(t) for t in self.trees],
        }

    def model_hash(self) -> str:
        return hashlib.sha256(self.save()).hexdigest()


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ModelFormatError(f"missing {key!r} field in {where}")
    return doc[key]


def load_model(data: bytes | str | dict) -> Ensemble:
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"malformed model document: {exc}") from exc
    else:
        doc = data
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = _require(doc, "version", "model document")
    if version != 1:
        raise ModelFormatError(f"unknown model document version {version!r}")
    schema_doc = _require(doc, "schema", "model document")
    feats = []
    for fd in _require(schema_doc, "features", "schema"):
        feats.append(Feature(
            name=_require(fd, "name", "feature"),
            kind=_require(fd, "kind", "feature"),
            lo=float(_require(fd, "lo", "feature")),
            hi=float(_require(fd, "hi", "feature")),
        ))
    schema = FeatureSchema(tuple(feats))
    classes = _require(doc, "classes", "model document")

    def parse_node(nd):
        if "votes" in nd:
            return TreeNode.leaf(nd["votes"])
        return TreeNode.split(
            int(_require(nd, "feature", "tree node")),
            float(_require(nd, "threshold", "tree node")),
            parse_node(_require(nd, "left", "tree node")),
            parse_node(_require(nd, "right", "tree node")),
        )

    trees = [parse_node(td) for td in _require(doc, "trees", "model document")]
    try:
        return Ensemble(schema=schema, classes=tuple(classes), trees=trees)
    except SchemaError as exc:
        raise ModelFormatError(f"model document violates an invariant: {exc}") from exc


def save_model(e: Ensemble) -> bytes:
    return e.save()


def _gini_best_split(X, y, n_classes):
    """Best (feature, threshold) by Gini impurity decrease; None if no valid split.

    Candidate thresholds are midpoints between consecutive distinct observed
    values. Ties broken by lowest feature index, then lowest threshold.
    """
    n, m = X.shape
    best = None  # (neg_decrease, feature, threshold) minimized lexicographically
    counts_total = np.bincount(y, minlength=n_classes).astype(float)
    gini_parent = 1.0 - np.sum((counts_total / n) ** 2)
    for f in range(m):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        cut = np.nonzero(xs[1:] > xs[:-1])[0]  # split after position i
        if cut.size == 0:
            continue
        nl = (cut + 1).astype(float)
        nr = n - nl
        cl = left_counts[cut]
        cr = counts_total - cl
        gini_l = 1.0 - np.sum((cl / nl[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((cr / nr[:, None]) ** 2, axis=1)
        decrease = gini_parent - (nl / n) * gini_l - (nr / n) * gini_r
        thresholds = 0.5 * (xs[cut] + xs[cut + 1])
        for d, t in zip(decrease, thresholds):
            cand = (-d, f, float(t))
            if best is None or cand < best:
                best = cand
    if best is None or best[0] >= -1e-15:
        return None
    return best[1], best[2]


def _grow_tree(X, y, n_classes, depth, max_depth, rng_unused, schema):
    counts = np.bincount(y, minlength=n_classes).astype(float)
    if depth >= max_depth or len(np.unique(y)) <= 1 or len(y) < 2:
        return TreeNode.leaf(counts)
    found = _gini_best_split(X, y, n_classes)
    if found is None:
        return TreeNode.leaf(counts)
    f, t = found
    feat = schema.features[f]
    if not (feat.lo < t < feat.hi):  # degenerate midpoint at the domain edge
        return TreeNode.leaf(counts)
    mask = X[:, f] <= t
    left = _grow_tree(X[mask], y[mask], n_classes, depth + 1, max_depth, rng_unused, schema)
    right = _grow_tree(X[~mask], y[~mask], n_classes, depth + 1, max_depth, rng_unused, schema)
    return TreeNode.split(f, t, left, right)


def train_forest(X, y, schema: FeatureSchema, classes, n_trees: int,
                 max_depth: int, seed: int = 0, bootstrap: bool = True) -> Ensemble:
    """CART with Gini impurity and midpoint thresholds; deterministic given seed."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != schema.m:
        raise SchemaError(f"dataset has shape {X.shape}, expected (n, {schema.m})")
    if X.shape[0] == 0:
        raise SchemaError("empty dataset")
    if X.shape[0] != y.shape[0]:
        raise SchemaError("X and y row counts differ")
    if n_trees < 1 or max_depth < 1:
        raise SchemaError("n_trees and max_depth must be >= 1")
    n_classes = len(classes)
    if np.any(y < 0) or np.any(y >= n_classes):
        raise SchemaError("labels out of range for the given classes")
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        if bootstrap:
            idx = rng.integers(0, X.shape[0], size=X.shape[0])
        else:
            idx = np.arange(X.shape[0])
        trees.append(_grow_tree(X[idx], y[idx], n_classes, 0, max_depth, rng, schema))
    return Ensemble(schema=schema, classes=tuple(classes), trees=trees)


def schema_from_data(X, names=None, pad: float = 0.05) -> FeatureSchema:
    """Continuous schema whose domain box is the data range padded outward."""
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    width = np.maximum(hi - lo, 1e-9)
    lo = lo - pad * width
    hi = hi + pad * width
    feats = []
    for j in range(X.shape[1]):
        name = names[j] if names is not None else f"f{j}"
        feats.append(Feature(name=name, kind="continuous", lo=float(lo[j]), hi=float(hi[j])))
    return FeatureSchema(tuple(feats))
