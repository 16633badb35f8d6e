import cv2
import numpy as np
import pytest
from scipy import ndimage

from conftest import hole_free_mask
from pointrectify.region import (
    EIGHT,
    ConfidentMovingRegion,
    extract_regions,
    point_in_region,
    points_in_polygon,
    polygon_area,
    regions_for_video,
    trace_outer_boundary,
)

SQUARE = np.array([[0, 0], [10, 0], [10, 10], [0, 10]], dtype=float)


def rasterize(cmr, shape):
    yy, xx = np.mgrid[0:shape[0], 0:shape[1]]
    pts = np.column_stack([xx.ravel(), yy.ravel()]).astype(float)
    return cmr.contains(pts).reshape(shape)


def filtered(mask, min_area):
    labels, n = ndimage.label(mask, structure=EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    keep = sizes >= min_area
    keep[0] = False
    return keep[labels]


def test_empty_mask_gives_no_polygons():
    cmr = extract_regions(np.zeros((16, 16), bool))
    assert len(cmr) == 0 and cmr.source_mask_area == 0
    assert not point_in_region((3, 3), cmr)


def test_rectangle():
    mask = np.zeros((32, 32), bool)
    mask[6:16, 4:14] = True  # x in [4, 13], y in [6, 15]
    cmr = extract_regions(mask)
    assert len(cmr) == 1
    assert polygon_area(cmr.polygons[0]) == 100
    labels, n = ndimage.label(mask, structure=EIGHT)
    assert n == 1
    assert np.array_equal(rasterize(cmr, mask.shape), labels == 1)
    assert sorted(map(tuple, cmr.polygons[0])) == sorted(
        [(3.5, 5.5), (13.5, 5.5), (13.5, 15.5), (3.5, 15.5)])


def test_min_area_filters_small_blob():
    mask = np.zeros((30, 30), bool)
    mask[2:7, 2:12] = True  # 50 px
    mask[20, 20:23] = True  # 3 px
    assert len(extract_regions(mask, min_area=10)) == 1
    assert len(extract_regions(mask, min_area=3)) == 2
    assert len(extract_regions(mask, min_area=51)) == 0


def test_point_in_square_examples():
    cmr = ConfidentMovingRegion(0, [SQUARE])
    assert point_in_region((5, 5), cmr)
    assert not point_in_region((15, 5), cmr)
    assert point_in_region((10, 5), cmr)
    assert point_in_region((0, 0), cmr)
    assert point_in_region((10, 10), cmr)
    assert not point_in_region((10.001, 5), cmr)


def test_points_in_polygon_matches_cv2():
    rng = np.random.default_rng(7)
    for _ in range(50):
        # random star-shaped polygon with integer vertices
        n = rng.integers(3, 12)
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = rng.uniform(3, 20, n)
        poly = np.round(np.column_stack([30 + rad * np.cos(ang), 30 + rad * np.sin(ang)]))
        pts = rng.uniform(5, 55, (200, 2))
        pts = np.vstack([pts, poly, np.round(pts[:50])])  # include vertices and lattice points
        ours = points_in_polygon(pts, poly)
        contour = poly.astype(np.float32).reshape(-1, 1, 2)
        theirs = np.array([cv2.pointPolygonTest(contour, (float(x), float(y)), False) >= 0
                           for x, y in pts])
        assert np.array_equal(ours, theirs)


def test_mask_equivalence_random():
    rng = np.random.default_rng(11)
    for _ in range(300):
        mask = hole_free_mask(rng)
        min_area = int(rng.integers(1, 12))
        cmr = extract_regions(mask, min_area=min_area)
        assert np.array_equal(rasterize(cmr, mask.shape), filtered(mask, min_area))
        for poly in cmr.polygons:
            assert polygon_area(poly) >= min_area


def test_area_equals_pixel_count():
    rng = np.random.default_rng(2)
    for _ in range(100):
        mask = hole_free_mask(rng)
        labels, n = ndimage.label(mask, structure=EIGHT)
        for k in range(1, n + 1):
            comp = labels == k
            assert polygon_area(trace_outer_boundary(comp)) == comp.sum()


def test_holes_are_filled():
    mask = np.zeros((12, 12), bool)
    mask[2:9, 2:9] = True
    mask[4:7, 4:7] = False
    cmr = extract_regions(mask)
    assert len(cmr) == 1
    assert point_in_region((5, 5), cmr)


def test_diagonal_touch_is_one_component():
    mask = np.zeros((8, 8), bool)
    mask[1:4, 1:4] = True
    mask[4:7, 4:7] = True
    cmr = extract_regions(mask, min_area=1)
    assert len(cmr) == 1
    assert polygon_area(cmr.polygons[0]) == 18
    assert np.array_equal(rasterize(cmr, mask.shape), mask)


def test_translation_invariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        mask = np.zeros((40, 40), bool)
        mask[:20, :20] = hole_free_mask(rng, (20, 20))
        dy, dx = rng.integers(0, 20, 2)
        shifted = np.roll(mask, (dy, dx), axis=(0, 1))
        a = extract_regions(mask, min_area=1).polygons
        b = extract_regions(shifted, min_area=1).polygons
        key = lambda p: tuple(map(tuple, p))  # noqa: E731
        assert sorted(key(p + [dx, dy]) for p in a) == sorted(key(p) for p in b)


def test_repeated_queries_agree():
    rng = np.random.default_rng(3)
    cmr = extract_regions(hole_free_mask(rng, (32, 32), blobs=6), min_area=1)
    pts = rng.uniform(0, 32, (500, 2))
    assert np.array_equal(cmr.contains(pts), cmr.contains(pts))


def test_regions_for_video_and_dict():
    masks = np.zeros((3, 10, 10), bool)
    masks[1, 2:6, 2:6] = True
    regs = regions_for_video(masks, min_area=4)
    assert [len(r) for r in regs] == [0, 1, 0]
    assert [r.frame_index for r in regs] == [0, 1, 2]
    d = regs[1].to_dict()
    assert d["frame"] == 1 and len(d["polygons"]) == 1


def test_empty_polygon_contains_nothing():
    assert not points_in_polygon(np.array([[1.0, 1.0]]), np.zeros((0, 2))).any()


@pytest.mark.parametrize("shape", [(1, 1), (1, 5), (5, 1)])
def test_thin_shapes(shape):
    mask = np.ones(shape, bool)
    cmr = extract_regions(mask, min_area=1)
    assert polygon_area(cmr.polygons[0]) == mask.sum()
    assert np.array_equal(rasterize(cmr, shape), mask)
