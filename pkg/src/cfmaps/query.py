"""Certified branch-and-bound nearest-rectangle search and the linear oracle.

The search pops KD-tree nodes in lower-bound order, stops as soon as the
popped bound reaches the best distance found, and therefore returns the true
minimum over the class's rectangles. Equidistant rectangles resolve to the
lowest rect id, identically in the tree search and the exhaustive scan.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .cfindex import KdTree, subtree_rect_ids
from .errors import InfeasibleTargetError, InvalidTargetError, SchemaError
from .geometry import NormSpec, batch_distance, distance, project_strict
from .maps import CounterfactualMaps
from .partition import Partition


@dataclass
class Certificate:
    nodes_popped: int = 0
    nodes_pruned: int = 0
    rects_evaluated: int = 0
    final_popped_bound: float | None = None


@dataclass
class QueryRequest:
    x: np.ndarray
    target: int | None = None
    norm: NormSpec = field(default_factory=NormSpec)
    frozen: frozenset = frozenset()
    eps: float | np.ndarray | None = None


@dataclass
class CounterfactualResult:
    rect_id: int
    x_cf: np.ndarray
    distance: float
    target: int
    certificate: Certificate


def _freeze_mask(x, los, his, frozen) -> np.ndarray:
    """Admissible iff x_k lies in the closure of the rect's k-interval for
    every frozen k."""
    if not frozen:
        return np.ones(los.shape[0], dtype=bool)
    ks = sorted(frozen)
    ok = np.ones(los.shape[0], dtype=bool)
    for k in ks:
        ok &= (los[:, k] <= x[k]) & (x[k] <= his[:, k])
    return ok


def nearest_region(t: KdTree, x, norm: NormSpec = NormSpec(),
                   frozen: frozenset = frozenset(),
                   coverage_check: bool = False):
    """Best-first search of one class tree; returns (rect_id, distance, cert).

    With coverage_check=True the loop additionally asserts, at every
    iteration, that each unvisited rectangle sits under a queued node or
    under a node whose bound already rules it out (single-threaded, slow).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != t.root.bbox_lo.shape:
        raise SchemaError(
            f"query has dimension {x.shape[0]}, index expects {t.root.bbox_lo.shape[0]}"
        )
    norm.check_dim(x.shape[0])
    cert = Certificate()
    # the running optimum is the lexicographic pair (distance, rect id); a
    # node's valid pair lower bound is (box distance, smallest subtree id)
    best_d = math.inf
    best_id = math.inf
    seq = 0
    root_lb = distance(x, t.root.bbox_lo, t.root.bbox_hi, norm)
    heap = [(root_lb, t.root.min_id, seq, t.root)]

    if coverage_check:
        queued = {id(t.root): t.root}
        ruled_out = []  # (node, bound at prune time)
        visited: set = set()
        all_ids = set(int(i) for i in subtree_rect_ids(t.root))
        id_cache: dict = {}

        def ids_under(node):
            key = id(node)
            if key not in id_cache:
                id_cache[key] = set(int(i) for i in subtree_rect_ids(node))
            return id_cache[key]

        def assert_coverage():
            covered = set()
            for node in queued.values():
                covered |= ids_under(node)
            for node, lb in ruled_out:
                assert lb >= best_d, "ruled-out node bound below the optimum"
                covered |= ids_under(node)
            missing = all_ids - visited - covered
            assert not missing, f"coverage invariant violated for rects {missing}"

    pop_bounds = []
    while heap:
        lb, min_id, _, node = heapq.heappop(heap)
        cert.nodes_popped += 1
        pop_bounds.append(lb)
        if coverage_check:
            queued.pop(id(node), None)
        if (lb, min_id) >= (best_d, best_id):
            cert.final_popped_bound = lb
            if coverage_check:
                ruled_out.append((node, lb))
                assert_coverage()
            break
        if node.is_leaf:
            ok = _freeze_mask(x, node.rect_lo, node.rect_hi, frozen)
            if np.any(ok):
                d = batch_distance(x, node.rect_lo[ok], node.rect_hi[ok], norm)
                cert.rects_evaluated += int(ok.sum())
                ids = node.rect_ids[ok]
                j = int(np.lexsort((ids, d))[0])
                if (d[j], ids[j]) < (best_d, best_id):
                    best_d = float(d[j])
                    best_id = int(ids[j])
            if coverage_check:
                visited |= set(int(i) for i in node.rect_ids)
                assert_coverage()
        else:
            for child in (node.left, node.right):
                clb = distance(x, child.bbox_lo, child.bbox_hi, norm)
                if (clb, child.min_id) < (best_d, best_id):
                    seq += 1
                    heapq.heappush(heap, (clb, child.min_id, seq, child))
                    if coverage_check:
                        queued[id(child)] = child
                else:
                    cert.nodes_pruned += 1
                    if coverage_check:
                        ruled_out.append((child, clb))
            if coverage_check:
                assert_coverage()

    assert all(pop_bounds[i] <= pop_bounds[i + 1] for i in range(len(pop_bounds) - 1))
    if best_d == math.inf:
        raise InfeasibleTargetError(
            f"no admissible region of class {t.class_label} under the given freezes"
        )
    return int(best_id), best_d, cert


def linear_scan_oracle(p: Partition, y_prime: int, x, norm: NormSpec = NormSpec(),
                       frozen: frozenset = frozenset()):
    """Exhaustive minimum over the class's rects with the identical tie rule."""
    x = np.asarray(x, dtype=float)
    ids, los, his = p.class_arrays(int(y_prime))
    if len(ids) == 0:
        raise InfeasibleTargetError(f"class {y_prime} has no regions")
    ok = _freeze_mask(x, los, his, frozen)
    if not np.any(ok):
        raise InfeasibleTargetError(
            f"no admissible region of class {y_prime} under the given freezes"
        )
    d = batch_distance(x, los[ok], his[ok], norm)
    sel = ids[ok]
    j = int(np.lexsort((sel, d))[0])
    return int(sel[j]), float(d[j])


DEFAULT_EPS_FRACTION = 1e-9


def _default_eps(maps: CounterfactualMaps, rect) -> np.ndarray:
    width = maps.partition.domain_hi - maps.partition.domain_lo
    eps = DEFAULT_EPS_FRACTION * width
    return np.minimum(eps, 0.25 * (rect.hi - rect.lo))


def _strict_point(maps: CounterfactualMaps, rect, x, eps) -> np.ndarray:
    lo_open = rect.lo > maps.partition.domain_lo
    hi_open = ~np.asarray(rect.hi_closed, dtype=bool)
    if eps is None:
        eps = _default_eps(maps, rect)
    return project_strict(x, rect.lo, rect.hi, lo_open, hi_open, eps)


def counterfactual(maps: CounterfactualMaps, req: QueryRequest) -> CounterfactualResult:
    """Targeted query: nearest region of the target class, then strict projection."""
    if maps.ensemble is None:
        raise SchemaError("targeted queries need the source ensemble attached")
    x = maps.ensemble.schema.check_point(req.x)
    pred = maps.ensemble.predict(x)
    if req.target is None:
        return counterfactual_any(maps, x, req.norm, req.frozen, req.eps)
    target = int(req.target)
    if target == pred:
        raise InvalidTargetError(
            f"target class {target} already equals the current prediction"
        )
    if target not in maps.trees:
        raise InfeasibleTargetError(f"class {target} has no regions")
    rect_id, d, cert = nearest_region(maps.trees[target], x, req.norm, req.frozen)
    rect = maps.partition.rect_by_id(rect_id)
    x_cf = _strict_point(maps, rect, x, req.eps)
    return CounterfactualResult(rect_id=rect_id, x_cf=x_cf, distance=d,
                                target=target, certificate=cert)


def counterfactual_any(maps: CounterfactualMaps, x, norm: NormSpec = NormSpec(),
                       frozen: frozenset = frozenset(), eps=None) -> CounterfactualResult:
    """Closest region over all classes other than the current prediction;
    ties by class index then rect id."""
    if maps.ensemble is None:
        raise SchemaError("queries need the source ensemble attached")
    x = maps.ensemble.schema.check_point(x)
    pred = maps.ensemble.predict(x)
    if maps.ensemble.n_classes < 2:
        raise InfeasibleTargetError("single-class model has no counterfactuals")
    best = None
    for label in maps.classes:
        if label == pred:
            continue
        try:
            rect_id, d, cert = nearest_region(maps.trees[label], x, norm, frozen)
        except InfeasibleTargetError:
            continue
        key = (d, label, rect_id)
        if best is None or key < best[0]:
            best = (key, rect_id, d, label, cert)
    if best is None:
        raise InfeasibleTargetError("no alternative class has an admissible region")
    _, rect_id, d, label, cert = best
    rect = maps.partition.rect_by_id(rect_id)
    x_cf = _strict_point(maps, rect, x, eps)
    return CounterfactualResult(rect_id=rect_id, x_cf=x_cf, distance=d,
                                target=label, certificate=cert)
