"""Counterfactual maps for decision-tree ensembles.

Build pipeline: train or import an ensemble, extract its labeled
hyperrectangle partition, and index each class's regions in a volumetric
KD-tree. Query pipeline: certified branch-and-bound nearest-region search
followed by projection, yielding globally optimal counterfactuals.
"""

from .cfindex import KdNode, KdTree, build_index, index_stats, load_index, save_index
from .ensemble import (
    Ensemble,
    Feature,
    FeatureSchema,
    TreeNode,
    load_model,
    save_model,
    schema_from_data,
    train_forest,
)
from .errors import (
    CfMapsError,
    DomainError,
    GridCapExceededError,
    InfeasibleTargetError,
    InvalidTargetError,
    ModelFormatError,
    NotBuiltError,
    SchemaError,
)
from .geometry import NormSpec, distance, gap_vector, project, project_strict
from .maps import CounterfactualMaps, build_maps
from .partition import (
    Hyperrectangle,
    Interval,
    Partition,
    constancy_check,
    extract_exact_grid,
    extract_partition,
    load_partition,
    reachable_leaves,
    save_partition,
    verify_partition,
)
from .query import (
    Certificate,
    CounterfactualResult,
    QueryRequest,
    counterfactual,
    counterfactual_any,
    linear_scan_oracle,
    nearest_region,
)

__version__ = "0.1.0"
