"""End-to-end build product: partition plus one KD-tree per target class."""

from __future__ import annotations

from dataclasses import dataclass, field

from .cfindex import DEFAULT_LEAF_CAPACITY, KdTree, build_index
from .ensemble import Ensemble
from .partition import Partition, extract_partition


@dataclass
class CounterfactualMaps:
    partition: Partition
    trees: dict  # class label -> KdTree
    ensemble: Ensemble | None = None
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY
    build_seconds: float = field(default=0.0, compare=False)

    @property
    def m(self) -> int:
        return len(self.partition.domain_lo)

    @property
    def classes(self) -> list:
        return sorted(self.partition.per_class.keys())

    def tree_for(self, label: int) -> KdTree | None:
        return self.trees.get(int(label))


def build_maps(e: Ensemble, leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
               partition: Partition | None = None) -> CounterfactualMaps:
    """Run the one-time build pipeline: extract the partition, then index
    every class that owns at least one region."""
    import time

    t0 = time.perf_counter()
    p = partition if partition is not None else extract_partition(e)
    trees = {
        label: build_index(p, label, leaf_capacity)
        for label in sorted(p.per_class.keys())
    }
    return CounterfactualMaps(
        partition=p, trees=trees, ensemble=e, leaf_capacity=leaf_capacity,
        build_seconds=time.perf_counter() - t0,
    )
