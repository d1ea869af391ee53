import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import cfmaps as cm
from cfmaps.datasets import make_blobs

settings.register_profile(
    "ci", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def unit_square_schema(m=2, lo=0.0, hi=1.0):
    return cm.FeatureSchema(tuple(
        cm.Feature(f"x{j}", "continuous", lo, hi) for j in range(m)
    ))


def stump(feature, threshold, left_class, right_class, n_classes=2):
    lv = np.zeros(n_classes); lv[left_class] = 1
    rv = np.zeros(n_classes); rv[right_class] = 1
    return cm.TreeNode.split(feature, threshold, cm.TreeNode.leaf(lv), cm.TreeNode.leaf(rv))


@pytest.fixture
def single_split_ensemble():
    """x0 <= 0.5 -> class 0 else class 1, on [0, 1]."""
    schema = unit_square_schema(m=1)
    return cm.Ensemble(schema=schema, classes=(0, 1), trees=[stump(0, 0.5, 0, 1)])


@pytest.fixture
def quadrant_ensemble():
    """Two stumps on different features of [0,1]^2; majority constant on 3
    of 4 quadrants, tie (decided by the lowest-index rule) on the fourth."""
    schema = unit_square_schema(m=2)
    trees = [stump(0, 0.5, 0, 1), stump(1, 0.5, 0, 1)]
    return cm.Ensemble(schema=schema, classes=(0, 1), trees=trees)


@pytest.fixture(scope="session")
def blobs_forest():
    """Fig-style fixture: 2-feature blobs, 2 depth-5 trees."""
    X, y = make_blobs(n=300, m=2, n_classes=3, seed=7)
    schema = cm.schema_from_data(X)
    e = cm.train_forest(X, y, schema, classes=(0, 1, 2), n_trees=2,
                        max_depth=5, seed=7)
    return e, X, y


@pytest.fixture(scope="session")
def blobs_maps(blobs_forest):
    e, X, y = blobs_forest
    return cm.build_maps(e)


def random_tree(rng, schema, depth, n_classes=2):
    """Random full binary decision tree for oracle-backed tests."""
    def grow(lo, hi, d):
        if d == 0:
            votes = np.zeros(n_classes)
            votes[rng.integers(n_classes)] = 1
            return cm.TreeNode.leaf(votes)
        f = int(rng.integers(len(lo)))
        t = float(rng.uniform(lo[f], hi[f]))
        while not (lo[f] < t < hi[f]):
            t = float(rng.uniform(lo[f], hi[f]))
        hi_l = hi.copy(); hi_l[f] = t
        lo_r = lo.copy(); lo_r[f] = t
        return cm.TreeNode.split(f, t, grow(lo, hi_l, d - 1), grow(lo_r, hi, d - 1))

    return grow(schema.domain_lo, schema.domain_hi, depth)
