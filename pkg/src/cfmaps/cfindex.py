"""Volumetric KD-trees: one per target class, indexing that class's boxes.

Each node carries the smallest closed box enclosing the closures of every
rectangle in its subtree, so the node box distance is a valid lower bound on
all contained rectangle distances for any weighted L_p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleTargetError, ModelFormatError
from .partition import Partition


@dataclass
class KdNode:
    bbox_lo: np.ndarray
    bbox_hi: np.ndarray
    left: "KdNode | None" = None
    right: "KdNode | None" = None
    rect_ids: np.ndarray | None = None   # leaves only
    rect_lo: np.ndarray | None = None    # (k, m) closures, leaves only
    rect_hi: np.ndarray | None = None
    min_id: int = 0  # smallest rect id in the subtree; tie-break lower bound

    @property
    def is_leaf(self) -> bool:
        return self.rect_ids is not None


@dataclass
class KdTree:
    class_label: int
    root: KdNode
    n_rects: int
    leaf_capacity: int


DEFAULT_LEAF_CAPACITY = 8


def build_from_arrays(ids: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                      class_label: int,
                      leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> KdTree:
    """Bulk-load a KD-tree over rect closures given as (n, m) bound arrays."""
    if len(ids) == 0:
        raise InfeasibleTargetError(
            f"class {class_label} has no regions; target is unexplainable"
        )
    centers = 0.5 * (lo + hi)

    def build(idx: np.ndarray) -> KdNode:
        blo = lo[idx].min(axis=0)
        bhi = hi[idx].max(axis=0)
        if len(idx) <= leaf_capacity:
            order = np.argsort(ids[idx], kind="stable")
            sel = idx[order]
            return KdNode(bbox_lo=blo, bbox_hi=bhi, rect_ids=ids[sel],
                          rect_lo=lo[sel], rect_hi=hi[sel],
                          min_id=int(ids[sel].min()))
        c = centers[idx]
        spread = c.max(axis=0) - c.min(axis=0)
        dim = int(np.argmax(spread))
        order = np.lexsort((ids[idx], c[:, dim]))
        mid = len(idx) // 2
        left = build(idx[order[:mid]])
        right = build(idx[order[mid:]])
        return KdNode(bbox_lo=blo, bbox_hi=bhi, left=left, right=right,
                      min_id=min(left.min_id, right.min_id))

    return KdTree(class_label=int(class_label), root=build(np.arange(len(ids))),
                  n_rects=len(ids), leaf_capacity=leaf_capacity)


def build_index(p: Partition, y_prime: int,
                leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> KdTree:
    ids, lo, hi = p.class_arrays(int(y_prime))
    return build_from_arrays(ids, lo, hi, int(y_prime), leaf_capacity)


@dataclass
class IndexStats:
    n_nodes: int
    depth: int
    mean_leaf_fill: float


def index_stats(t: KdTree) -> IndexStats:
    n_nodes = 0
    depth = 0
    leaf_sizes = []

    def walk(node, d):
        nonlocal n_nodes, depth
        n_nodes += 1
        depth = max(depth, d)
        if node.is_leaf:
            leaf_sizes.append(len(node.rect_ids))
        else:
            walk(node.left, d + 1)
            walk(node.right, d + 1)

    walk(t.root, 0)
    return IndexStats(n_nodes=n_nodes, depth=depth,
                      mean_leaf_fill=float(np.mean(leaf_sizes)))


def subtree_rect_ids(node: KdNode) -> np.ndarray:
    """All rect ids under a node; used by structural audits and the
    instrumented coverage check."""
    if node.is_leaf:
        return node.rect_ids
    return np.concatenate([subtree_rect_ids(node.left), subtree_rect_ids(node.right)])


def save_index(t: KdTree) -> bytes:
    nodes = []

    def walk(node):
        if node.is_leaf:
            nodes.append({
                "bbox_lo": node.bbox_lo.tolist(),
                "bbox_hi": node.bbox_hi.tolist(),
                "rect_ids": node.rect_ids.tolist(),
                "rect_lo": node.rect_lo.tolist(),
                "rect_hi": node.rect_hi.tolist(),
            })
        else:
            nodes.append({
                "bbox_lo": node.bbox_lo.tolist(),
                "bbox_hi": node.bbox_hi.tolist(),
            })
            walk(node.left)
            walk(node.right)

    walk(t.root)
    doc = {
        "version": 1,
        "class_label": t.class_label,
        "n_rects": t.n_rects,
        "leaf_capacity": t.leaf_capacity,
        "nodes": nodes,  # preorder; children of an internal node follow it
    }
    return json.dumps(doc, sort_keys=True).encode("utf-8")


def load_index(data: bytes | str) -> KdTree:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed index document: {exc}") from exc
    if doc.get("version") != 1:
        raise ModelFormatError(f"unknown index version {doc.get('version')!r}")
    nodes = doc["nodes"]
    pos = 0

    def parse() -> KdNode:
        nonlocal pos
        nd = nodes[pos]
        pos += 1
        if "rect_ids" in nd:
            ids = np.array(nd["rect_ids"], dtype=np.int64)
            return KdNode(
                bbox_lo=np.array(nd["bbox_lo"], dtype=float),
                bbox_hi=np.array(nd["bbox_hi"], dtype=float),
                rect_ids=ids,
                rect_lo=np.array(nd["rect_lo"], dtype=float),
                rect_hi=np.array(nd["rect_hi"], dtype=float),
                min_id=int(ids.min()),
            )
        node = KdNode(bbox_lo=np.array(nd["bbox_lo"], dtype=float),
                      bbox_hi=np.array(nd["bbox_hi"], dtype=float))
        node.left = parse()
        node.right = parse()
        node.min_id = min(node.left.min_id, node.right.min_id)
        return node

    root = parse()
    if pos != len(nodes):
        raise ModelFormatError("index document has trailing nodes")
    return KdTree(class_label=int(doc["class_label"]), root=root,
                  n_rects=int(doc["n_rects"]),
                  leaf_capacity=int(doc["leaf_capacity"]))
