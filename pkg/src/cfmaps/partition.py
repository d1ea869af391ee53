"""Extraction of a complete, disjoint, faithful labeled box partition.

Side semantics follow the "x <= threshold routes left" rule: every interval
piece is open at its lower end and closed at its upper end, except that the
piece touching the feature's domain minimum is closed there too. Splitting
(lo, hi] at an interior t yields (lo, t] and (t, hi].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble, FlatTree, TreeNode
from .errors import GridCapExceededError, ModelFormatError, SchemaError


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    hi_closed: bool = True

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise SchemaError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass
class Hyperrectangle:
    id: int
    label: int
    lo: np.ndarray
    hi: np.ndarray
    hi_closed: np.ndarray  # per-dimension; upper side closed iff True

    @property
    def bounds(self) -> list:
        return [Interval(float(l), float(h), bool(c))
                for l, h, c in zip(self.lo, self.hi, self.hi_closed)]

    def contains(self, x, domain_lo) -> bool:
        """Exact membership under the half-open side semantics."""
        x = np.asarray(x, dtype=float)
        lo_ok = (x > self.lo) | ((x == self.lo) & (self.lo == domain_lo))
        hi_ok = (x < self.hi) | ((x == self.hi) & self.hi_closed)
        return bool(np.all(lo_ok & hi_ok))


@dataclass
class Partition:
    rects: list
    domain_lo: np.ndarray
    domain_hi: np.ndarray
    n_classes: int
    model_hash: str = ""
    per_class: dict = field(default=None)
    _bounds: tuple = field(default=None, repr=False, compare=False)
    _class_arrays: dict = field(default=None, repr=False, compare=False)
    _locator: object = field(default=None, repr=False, compare=False)
    _by_id: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.per_class is None:
            ids, labels = self.bound_arrays()[:2]
            self.per_class = {
                int(y): ids[labels == y].tolist() for y in np.unique(labels)
            }

    @property
    def n(self) -> int:
        return len(self.rects)

    def rect_by_id(self, rect_id: int) -> Hyperrectangle:
        if self._by_id is None:
            self._by_id = {r.id: r for r in self.rects}
        return self._by_id[rect_id]

    def bound_arrays(self):
        """(ids, labels, lo, hi, hi_closed) arrays over all rects, built once."""
        if self._bounds is None:
            rs = self.rects
            m = len(self.domain_lo)
            self._bounds = (
                np.array([r.id for r in rs], dtype=np.int64),
                np.array([r.label for r in rs], dtype=np.int64),
                np.array([r.lo for r in rs]).reshape(len(rs), m),
                np.array([r.hi for r in rs]).reshape(len(rs), m),
                np.array([r.hi_closed for r in rs]).reshape(len(rs), m),
            )
        return self._bounds

    def class_arrays(self, label: int):
        """(ids, lo, hi) arrays for all rects of one class, sorted by id."""
        if self._class_arrays is None:
            self._class_arrays = {}
        if label not in self._class_arrays:
            ids, labels, lo, hi, _ = self.bound_arrays()
            sel = np.flatnonzero(labels == label)
            sel = sel[np.argsort(ids[sel], kind="stable")]
            self._class_arrays[label] = (ids[sel], lo[sel], hi[sel])
        return self._class_arrays[label]

    def locate_counts(self, X: np.ndarray):
        """Per-point membership count and containing-rect id (-1 if none)."""
        if self._locator is None:
            self._locator = _RectLocator(self, self.domain_lo)
        return self._locator.locate(np.asarray(X, dtype=float))


class _RectLocator:
    """Balanced median-partition tree for exact point location.

    Each rect sits on exactly one side of every split (by center order), so
    the tree has logarithmic depth by construction; nodes keep the enclosing
    box of their side, and a point only descends into nodes whose enclosing
    box contains it. Disjointness of the rects keeps the fan-out small.
    """

    LEAF_SIZE = 16

    def __init__(self, partition, domain_lo):
        self.domain_lo = domain_lo
        self.ids, self.labels, self.lo, self.hi, self.hi_closed = (
            partition.bound_arrays()
        )
        self.root = self._build(np.arange(len(self.ids)))

    def _build(self, idx):
        # iterative construction; recursion depth can exceed Python's limit
        def cell_for(ix):
            return ["leaf", ix, self.lo[ix].min(axis=0), self.hi[ix].max(axis=0)]

        centers = 0.5 * (self.lo + self.hi)
        root = cell_for(idx)
        todo = [root]
        while todo:
            cell = todo.pop()
            idx = cell[1]
            if len(idx) <= self.LEAF_SIZE:
                continue
            c = centers[idx]
            d = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            order = np.argsort(c[:, d], kind="stable")
            mid = len(idx) // 2
            lcell = cell_for(idx[order[:mid]])
            rcell = cell_for(idx[order[mid:]])
            cell[0] = "node"
            cell.append(lcell)
            cell.append(rcell)
            todo.append(lcell)
            todo.append(rcell)
        return root

    def locate(self, X):
        n = X.shape[0]
        counts = np.zeros(n, dtype=np.int64)
        rect_of = np.full(n, -1, dtype=np.int64)
        todo = [(self.root, np.arange(n))]
        while todo:
            node, pts = todo.pop()
            blo, bhi = node[2], node[3]
            keep = np.all((X[pts] >= blo) & (X[pts] <= bhi), axis=1)
            pts = pts[keep]
            if len(pts) == 0:
                continue
            if node[0] == "leaf":
                idx = node[1]
                sub = X[pts][:, None, :]               # (P, 1, m)
                lo, hi = self.lo[idx], self.hi[idx]    # (k, m)
                lo_ok = (sub > lo) | ((sub == lo) & (lo == self.domain_lo))
                hi_ok = (sub < hi) | ((sub == hi) & self.hi_closed[idx])
                inside = np.all(lo_ok & hi_ok, axis=2)  # (P, k)
                hits = inside.sum(axis=1)
                counts[pts] += hits
                hit_pts = hits > 0
                which = np.argmax(inside[hit_pts], axis=1)
                rect_of[pts[hit_pts]] = self.ids[idx][which]
                continue
            todo.append((node[4], pts))
            todo.append((node[5], pts))
        return counts, rect_of


class _StackedLeaves:
    """All leaves of all trees stacked into flat arrays for vectorized
    reachability and vote-bound computations."""

    def __init__(self, e: Ensemble):
        flats = e.flat_trees()
        self.n_trees = len(flats)
        self.n_classes = e.n_classes
        self.leaf_lo = np.vstack([f.leaf_lo for f in flats])
        self.leaf_hi = np.vstack([f.leaf_hi for f in flats])
        self.leaf_cls = np.concatenate([f.leaf_cls for f in flats])
        self.tree_of_leaf = np.concatenate([
            np.full(f.n_leaves, t, dtype=np.int64) for t, f in enumerate(flats)
        ])
        offs = np.cumsum([0] + [f.n_leaves for f in flats])
        self.int_feat = np.concatenate([f.int_feat for f in flats]).astype(np.int64)
        self.int_thr = np.concatenate([f.int_thr for f in flats])
        self.int_start = np.concatenate([
            f.int_start + offs[t] for t, f in enumerate(flats)
        ]).astype(np.int64)
        self.int_end = np.concatenate([
            f.int_end + offs[t] for t, f in enumerate(flats)
        ]).astype(np.int64)

    def reachable_mask(self, lo, hi) -> np.ndarray:
        """Boolean over stacked leaves: leaf region intersects box (lo, hi]."""
        return np.all(
            np.maximum(self.leaf_lo, lo) < np.minimum(self.leaf_hi, hi), axis=1
        )


def reachable_leaves(tree: TreeNode, box_lo, box_hi) -> list:
    """Leaves of one tree whose path-constraint region intersects box (lo, hi]."""
    box_lo = np.asarray(box_lo, dtype=float)
    box_hi = np.asarray(box_hi, dtype=float)
    out = []

    def walk(node):
        if node.is_leaf:
            out.append(node)
            return
        if box_lo[node.feature] < node.threshold:
            walk(node.left)
        if node.threshold < box_hi[node.feature]:
            walk(node.right)

    walk(tree)
    return out


def _vote_bounds(stacked: _StackedLeaves, reach: np.ndarray):
    """Per-class (min_votes, max_votes) over the trees, treating trees
    independently; the over-approximation that makes constancy sound."""
    c, T = stacked.n_classes, stacked.n_trees
    can = np.zeros((c, T), dtype=bool)
    can[stacked.leaf_cls[reach], stacked.tree_of_leaf[reach]] = True
    forced = can.sum(axis=0) == 1
    min_votes = (can & forced).sum(axis=1)
    max_votes = can.sum(axis=1)
    return min_votes, max_votes


def _decided_label(min_votes, max_votes):
    """Class whose guaranteed minimum beats every rival's maximum under the
    lowest-index tie rule, or None."""
    c = len(min_votes)
    for y in range(c):
        ok = True
        for y2 in range(c):
            if y2 == y:
                continue
            if min_votes[y] > max_votes[y2]:
                continue
            if min_votes[y] == max_votes[y2] and y < y2:
                continue
            ok = False
            break
        if ok:
            return y
    return None


def constancy_check(e: Ensemble, box_lo, box_hi):
    """Constant label of the ensemble on box (lo, hi], or None if undecided."""
    stacked = _StackedLeaves(e)
    reach = stacked.reachable_mask(np.asarray(box_lo, float), np.asarray(box_hi, float))
    mn, mx = _vote_bounds(stacked, reach)
    return _decided_label(mn, mx)


def extract_partition(e: Ensemble, chunk: int = 2048) -> Partition:
    """Constancy-guided extraction of the labeled box partition.

    Boxes are processed in vectorized chunks: reachability, vote bounds, the
    decided-label test and the split choice are all evaluated for up to
    `chunk` boxes at once, which is what keeps hundred-thousand-rect
    partitions tractable.
    """
    stacked = _StackedLeaves(e)
    dom_lo, dom_hi = e.schema.domain_lo, e.schema.domain_hi
    m = e.schema.m
    C, T = stacked.n_classes, stacked.n_trees
    L = len(stacked.leaf_cls)
    # leaf -> (class, tree) scatter matrix so reach @ leaf_slot counts, per
    # box, how many reachable leaves each tree has in each class
    leaf_slot = np.zeros((L, C * T), dtype=np.float32)
    leaf_slot[np.arange(L), stacked.leaf_cls * T + stacked.tree_of_leaf] = 1.0
    f = stacked.int_feat
    t = stacked.int_thr
    feat_onehot = np.zeros((len(f), m), dtype=np.int64)
    feat_onehot[np.arange(len(f)), f] = 1

    out_lo, out_hi, out_lab = [], [], []
    root_reach = stacked.reachable_mask(dom_lo, dom_hi)[None, :]
    queue = [(dom_lo[None, :].copy(), dom_hi[None, :].copy(), root_reach)]
    while queue:
        lo, hi, reach = queue.pop()
        if lo.shape[0] > chunk:
            queue.append((lo[chunk:], hi[chunk:], reach[chunk:]))
            lo, hi, reach = lo[:chunk], hi[:chunk], reach[:chunk]
        B = lo.shape[0]
        can = (reach.astype(np.float32) @ leaf_slot).reshape(B, C, T) > 0
        forced = can.sum(axis=1) == 1                   # (B, T)
        mn = (can & forced[:, None, :]).sum(axis=2)     # guaranteed votes
        mx = can.sum(axis=2)                            # attainable votes
        decided = np.full(B, -1, dtype=np.int64)
        free = np.ones(B, dtype=bool)
        for y in range(C):
            beats = np.ones(B, dtype=bool)
            for y2 in range(C):
                if y2 == y:
                    continue
                beats &= (mn[:, y] > mx[:, y2]) | ((mn[:, y] == mx[:, y2]) & (y < y2))
            win = free & beats
            decided[win] = y
            free &= ~win
        dec = decided >= 0
        if np.any(dec):
            out_lo.append(lo[dec])
            out_hi.append(hi[dec])
            out_lab.append(decided[dec])
        und = ~dec
        if not np.any(und):
            continue
        lo_u, hi_u = lo[und], hi[und]
        reach_u = reach[und]
        nb = lo_u.shape[0]
        creach = np.concatenate(
            [np.zeros((nb, 1), dtype=np.int32),
             np.cumsum(reach_u, axis=1, dtype=np.int32)], axis=1
        )
        node_reach = (creach[:, stacked.int_end] - creach[:, stacked.int_start]) > 0
        # active thresholds: reachable internal nodes with t strictly inside
        active = node_reach & (lo_u[:, f] < t) & (t < hi_u[:, f])
        if not np.all(np.any(active, axis=1)):  # every tree forced; cannot happen
            raise AssertionError("undecided box without active thresholds")
        counts = active @ feat_onehot
        split_f = np.argmax(counts, axis=1)
        # lower median of the active thresholds on the split feature
        tv = np.where(active & (f[None, :] == split_f[:, None]), t[None, :], np.inf)
        tv.sort(axis=1)
        n_cand = (tv < np.inf).sum(axis=1)
        rows = np.arange(nb)
        split_t = tv[rows, (n_cand - 1) // 2]
        hi_l = hi_u.copy(); hi_l[rows, split_f] = split_t
        lo_r = lo_u.copy(); lo_r[rows, split_f] = split_t
        # children inherit the parent's reachable set filtered on the one
        # bound that moved
        leaf_lo_f = stacked.leaf_lo[:, split_f].T  # (nb, L)
        leaf_hi_f = stacked.leaf_hi[:, split_f].T
        reach_l = reach_u & (leaf_lo_f < split_t[:, None])
        reach_r = reach_u & (split_t[:, None] < leaf_hi_f)
        queue.append((np.vstack([lo_u, lo_r]), np.vstack([hi_l, hi_u]),
                      np.vstack([reach_l, reach_r])))

    lo_all = np.vstack(out_lo)
    hi_all = np.vstack(out_hi)
    lab_all = np.concatenate(out_lab)
    # deterministic ids: lexicographic by lower corner (disjointness makes
    # lower corners unique)
    order = np.lexsort(tuple(lo_all[:, j] for j in reversed(range(m))))
    lo_all, hi_all, lab_all = lo_all[order], hi_all[order], lab_all[order]
    n = len(order)
    all_closed = np.ones(m, dtype=bool)
    all_closed.setflags(write=False)  # shared across rects
    rects = [
        Hyperrectangle(id=i, label=int(lab_all[i]), lo=lo_all[i], hi=hi_all[i],
                       hi_closed=all_closed)
        for i in range(n)
    ]
    bounds = (np.arange(n, dtype=np.int64), lab_all.astype(np.int64),
              lo_all, hi_all, np.ones((n, m), dtype=bool))
    return Partition(rects=rects, domain_lo=dom_lo, domain_hi=dom_hi,
                     n_classes=e.n_classes, model_hash=e.model_hash(),
                     _bounds=bounds)


def _all_thresholds(e: Ensemble) -> list:
    per_feature = [set() for _ in range(e.schema.m)]

    def walk(node):
        if node.is_leaf:
            return
        per_feature[node.feature].add(float(node.threshold))
        walk(node.left)
        walk(node.right)

    for t in e.trees:
        walk(t)
    return [sorted(s) for s in per_feature]


def extract_exact_grid(e: Ensemble, cell_cap: int = 10**6) -> Partition:
    """One rect per threshold-grid cell; the small-scale exactness oracle."""
    thresholds = _all_thresholds(e)
    dom_lo, dom_hi = e.schema.domain_lo, e.schema.domain_hi
    edges = [
        np.concatenate([[dom_lo[j]], ts, [dom_hi[j]]])
        for j, ts in enumerate(thresholds)
    ]
    shape = tuple(len(ed) - 1 for ed in edges)
    n_cells = int(np.prod([float(s) for s in shape]))
    if n_cells > cell_cap:
        raise GridCapExceededError(
            f"exact grid would have {n_cells} cells (cap {cell_cap})"
        )
    m = e.schema.m
    rects = []
    mids = []
    for idx in np.ndindex(shape):
        lo = np.array([edges[j][idx[j]] for j in range(m)])
        hi = np.array([edges[j][idx[j] + 1] for j in range(m)])
        rects.append(Hyperrectangle(
            id=len(rects), label=-1, lo=lo, hi=hi,
            hi_closed=np.ones(m, dtype=bool),
        ))
        mids.append(0.5 * (lo + hi))
    labels = e.predict_batch(np.array(mids).reshape(len(rects), m))
    for r, lab in zip(rects, labels):
        r.label = int(lab)
    return Partition(rects=rects, domain_lo=dom_lo, domain_hi=dom_hi,
                     n_classes=e.n_classes, model_hash=e.model_hash())


@dataclass
class VerifyReport:
    cover_violations: int
    overlap_violations: int
    faithfulness_violations: int

    def ok(self) -> bool:
        return (self.cover_violations == 0 and self.overlap_violations == 0
                and self.faithfulness_violations == 0)


def verify_partition(p: Partition, e: Ensemble, n_samples: int = 10**5,
                     seed: int = 0, extra_points=None) -> VerifyReport:
    """Sampled cover/disjointness/faithfulness audit; seeded and reproducible."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(p.domain_lo, p.domain_hi, size=(n_samples, len(p.domain_lo)))
    if extra_points is not None and len(extra_points):
        X = np.vstack([X, np.asarray(extra_points, dtype=float)])
    counts, rect_of = p.locate_counts(X)
    cover = int(np.sum(counts == 0))
    overlap = int(np.sum(counts > 1))
    # labels read fresh off the rect objects so even post-hoc tampering with
    # a single rect's label is caught
    ids = np.array([r.id for r in p.rects], dtype=np.int64)
    labels = np.array([r.label for r in p.rects], dtype=np.int64)
    label_of = np.full(int(ids.max()) + 1, -1, dtype=np.int64)
    label_of[ids] = labels
    pred = e.predict_batch(X)
    hit = rect_of >= 0
    faithless = int(np.sum(label_of[rect_of[hit]] != pred[hit]))
    return VerifyReport(cover, overlap, faithless)


def partition_to_doc(p: Partition) -> dict:
    return {
        "version": 1,
        "model_hash": p.model_hash,
        "rects": [
            {
                "id": r.id,
                "label": int(r.label),
                "bounds": [
                    {"lo": float(l), "hi": float(h), "hi_closed": bool(c)}
                    for l, h, c in zip(r.lo, r.hi, r.hi_closed)
                ],
            }
            for r in p.rects
        ],
    }


def save_partition(p: Partition) -> bytes:
    return json.dumps(partition_to_doc(p), sort_keys=True).encode("utf-8")


def load_partition(data: bytes | str | dict) -> Partition:
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"malformed partition document: {exc}") from exc
    else:
        doc = data
    if doc.get("version") != 1:
        raise ModelFormatError(f"unknown partition version {doc.get('version')!r}")
    if "rects" not in doc:
        raise ModelFormatError("missing 'rects' field in partition document")
    rects = []
    for rd in doc["rects"]:
        bounds = rd["bounds"]
        rects.append(Hyperrectangle(
            id=int(rd["id"]),
            label=int(rd["label"]),
            lo=np.array([b["lo"] for b in bounds], dtype=float),
            hi=np.array([b["hi"] for b in bounds], dtype=float),
            hi_closed=np.array([b["hi_closed"] for b in bounds], dtype=bool),
        ))
    if not rects:
        raise ModelFormatError("partition document has no rects")
    # cover implies the domain box is the elementwise envelope of the rects
    lo = np.min([r.lo for r in rects], axis=0)
    hi = np.max([r.hi for r in rects], axis=0)
    n_classes = max(r.label for r in rects) + 1
    return Partition(rects=rects, domain_lo=lo, domain_hi=hi,
                     n_classes=n_classes, model_hash=doc.get("model_hash", ""))


def partition_hash(p: Partition) -> str:
    return hashlib.sha256(save_partition(p)).hexdigest()
