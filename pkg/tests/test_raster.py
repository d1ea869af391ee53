import json
import math

import numpy as np
import pytest

import cfmaps as cm
from cfmaps.cfindex import build_index
from cfmaps.geometry import NormSpec
from cfmaps.maps import CounterfactualMaps
from cfmaps.partition import Hyperrectangle, Partition
from cfmaps.query import linear_scan_oracle
from cfmaps.raster import (
    RasterSpec,
    cell_centers,
    export_raster,
    import_raster_csv,
    rasterize,
    region_color,
)


def maps_from_rects(rects, dom_lo, dom_hi, n_classes=2):
    p = Partition(rects=rects, domain_lo=np.asarray(dom_lo, float),
                  domain_hi=np.asarray(dom_hi, float), n_classes=n_classes,
                  model_hash="fixture")
    trees = {lab: build_index(p, lab) for lab in sorted({r.label for r in rects})}
    return CounterfactualMaps(partition=p, trees=trees, ensemble=None,
                              leaf_capacity=8, build_seconds=0.0)


def rect(i, label, lo, hi):
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    return Hyperrectangle(id=i, label=label, lo=lo, hi=hi,
                          hi_closed=np.ones(len(lo), dtype=bool))


@pytest.fixture
def two_region_maps():
    """Two unit squares of class 1 at the left and right ends of [0,4]x[0,1]."""
    return maps_from_rects(
        [rect(0, 1, [0, 0], [1, 1]), rect(1, 1, [3, 0], [4, 1])],
        [0.0, 0.0], [4.0, 1.0])


class TestCellCenters:
    def test_values(self):
        assert np.allclose(cell_centers(0.0, 1.0, 4), [0.125, 0.375, 0.625, 0.875])

    def test_centers_stay_inside(self):
        c = cell_centers(-2.0, 5.0, 33)
        assert c.min() > -2.0 and c.max() < 5.0


class TestRasterize:
    def test_single_region_everywhere(self):
        maps = maps_from_rects([rect(0, 1, [0.4, 0.4], [0.6, 0.6])],
                               [0, 0], [1, 1])
        r = rasterize(maps, RasterSpec(0, 1, np.array([0.0, 0.0]),
                                       resolution=(10, 10), target=1))
        assert np.all(r.region_ids == 0)
        assert r.legend == {0: 1}
        assert r.distances[5, 5] == pytest.approx(0.0)
        assert r.distances[0, 0] > 0

    def test_midline_tie_resolves_to_lower_id(self, two_region_maps):
        # 8 columns over [0,4]: columns 3 and 4 straddle the x0=2 midline
        r = rasterize(two_region_maps,
                      RasterSpec(0, 1, np.array([0.0, 0.5]),
                                 resolution=(8, 2), target=1))
        assert np.all(r.region_ids[:, :4] == 0)
        assert np.all(r.region_ids[:, 4:] == 1)

    def test_matches_oracle_everywhere(self, blobs_maps):
        target = blobs_maps.classes[0]
        spec = RasterSpec(0, 1, blobs_maps.partition.domain_lo.copy(),
                          resolution=(25, 25), target=target)
        r = rasterize(blobs_maps, spec)
        for iy, cy in enumerate(r.ys):
            for ix, cx in enumerate(r.xs):
                x = spec.fixed_values.copy()
                x[0], x[1] = cx, cy
                rid, d = linear_scan_oracle(blobs_maps.partition, target, x)
                assert r.region_ids[iy, ix] == rid
                assert r.distances[iy, ix] == pytest.approx(d, rel=1e-12, abs=1e-300)

    def test_norms_can_disagree(self):
        """Witness pair where L1 and Linf pick different nearest regions:
        from the bottom-left cell center (1, 1), region A has gap (1.5, 0)
        so d1 = dinf = 1.5, while region B has gap (1, 1) so d1 = 2 but
        dinf = 1. L1 prefers A, Linf prefers B."""
        maps = maps_from_rects(
            [rect(0, 1, [2.5, 0.9], [2.6, 1.1]), rect(1, 1, [2.0, 2.0], [2.1, 2.1])],
            [0.0, 0.0], [4.0, 4.0])
        lo_res = (2, 2)
        r1 = rasterize(maps, RasterSpec(0, 1, np.zeros(2), lo_res,
                                        norm=NormSpec(p=1), target=1))
        ri = rasterize(maps, RasterSpec(0, 1, np.zeros(2), lo_res,
                                        norm=NormSpec(p=math.inf), target=1))
        assert r1.region_ids[0, 0] == 0   # bottom-left cell center (1, 1)
        assert ri.region_ids[0, 0] == 1
        assert not np.array_equal(r1.region_ids, ri.region_ids)

    def test_validation(self, two_region_maps):
        maps = two_region_maps
        fixed = np.array([0.0, 0.0])
        with pytest.raises(cm.SchemaError):
            rasterize(maps, RasterSpec(0, 0, fixed, target=1))
        with pytest.raises(cm.SchemaError):
            rasterize(maps, RasterSpec(0, 5, fixed, target=1))
        with pytest.raises(cm.SchemaError):
            rasterize(maps, RasterSpec(0, 1, fixed, resolution=(1, 5), target=1))
        with pytest.raises(cm.SchemaError):
            rasterize(maps, RasterSpec(0, 1, np.array([9.0, 0.0]), target=1))
        with pytest.raises(cm.InfeasibleTargetError):
            rasterize(maps, RasterSpec(0, 1, fixed, target=5))


class TestExport:
    def test_csv_round_trip_lossless(self, two_region_maps):
        r = rasterize(two_region_maps,
                      RasterSpec(0, 1, np.array([0.0, 0.5]),
                                 resolution=(7, 3), target=1))
        r2 = import_raster_csv(export_raster(r, "csv"))
        assert np.array_equal(r2.region_ids, r.region_ids)
        assert np.array_equal(r2.distances, r.distances)  # bit-exact via repr
        assert np.array_equal(r2.xs, r.xs)
        assert np.array_equal(r2.ys, r.ys)

    def test_csv_shape(self, two_region_maps):
        r = rasterize(two_region_maps,
                      RasterSpec(0, 1, np.array([0.0, 0.5]),
                                 resolution=(5, 4), target=1))
        lines = export_raster(r, "csv").decode().strip().split("\n")
        assert lines[0] == "ix,iy,cx,cy,rect_id,distance"
        assert len(lines) == 1 + 5 * 4

    def test_json_2x2(self, two_region_maps):
        r = rasterize(two_region_maps,
                      RasterSpec(0, 1, np.array([0.0, 0.5]),
                                 resolution=(2, 2), target=1))
        doc = json.loads(export_raster(r, "json"))
        assert doc["region_ids"] == [[0, 1], [0, 1]]
        assert doc["legend"] == {"0": 1, "1": 1}
        assert len(doc["xs"]) == 2 and len(doc["ys"]) == 2

    def test_ppm_has_distinct_colors(self, two_region_maps):
        r = rasterize(two_region_maps,
                      RasterSpec(0, 1, np.array([0.0, 0.5]),
                                 resolution=(4, 2), target=1))
        data = export_raster(r, "ppm").decode()
        assert data.startswith("P3 4 2 255")
        assert region_color(0) != region_color(1)

    def test_unknown_format(self, two_region_maps):
        r = rasterize(two_region_maps,
                      RasterSpec(0, 1, np.array([0.0, 0.5]),
                                 resolution=(2, 2), target=1))
        with pytest.raises(cm.SchemaError):
            export_raster(r, "bmp")

    def test_region_color_deterministic(self):
        assert region_color(42) == region_color(42)
        assert all(0 <= c <= 255 for c in region_color(7))
