"""Confident moving regions: polygons around foreground blobs, and membership tests.

Each 8-connected foreground component is outlined by walking its outer
boundary along pixel *edges*, so polygon vertices sit on pixel corners
(half-integer coordinates) and a component of ``n`` hole-free pixels encloses
area ``n`` exactly.  Pixel ``(row, col)`` has its centre at ``(x=col, y=row)``.

Holes are not traced; a point over a hole counts as inside the region.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

EIGHT = np.ones((3, 3), dtype=bool)

# heading -> (di, dj) on the corner grid, clockwise with y pointing down
_STEP = ((0, 1), (1, 0), (0, -1), (-1, 0))  # E, S, W, N
# pixels to the left/right of the edge leaving corner (i, j) along each heading
_AHEAD = (
    ((-1, 0), (0, 0)),
    ((0, 0), (0, -1)),
    ((0, -1), (-1, -1)),
    ((-1, -1), (-1, 0)),
)


def trace_outer_boundary(component: np.ndarray) -> np.ndarray:
    """Outer boundary of the single 8-connected blob in ``component``.

    Returns an (N, 2) array of (x, y) vertices, clockwise on screen, with
    collinear points dropped.
    """
    h, w = component.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = component
    rows, cols = np.nonzero(component)
    if rows.size == 0:
        return np.zeros((0, 2))
    k = np.lexsort((cols, rows))[0]
    start = (int(rows[k]), int(cols[k]))

    def fg(i: int, j: int) -> bool:
        return bool(padded[i + 1, j + 1])

    i, j = start
    d = 0
    verts = [(j - 0.5, i - 0.5)]
    while True:
        di, dj = _STEP[d]
        i, j = i + di, j + dj
        if (i, j) == start:
            break
        (li, lj), (ri, rj) = _AHEAD[d]
        left = fg(i + li, j + lj)
        right = fg(i + ri, j + rj)
        if left:
            nd = (d - 1) % 4
        elif right:
            nd = d
        else:
            nd = (d + 1) % 4
        if nd != d:
            verts.append((j - 0.5, i - 0.5))
            d = nd
    return np.asarray(verts, dtype=np.float64)


def polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def points_in_polygon(points: np.ndarray, vertices: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """Vectorised even-odd ray test; points on an edge count as inside."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(vertices) == 0:
        return np.zeros(len(pts), dtype=bool)
    px = pts[:, 0:1]
    py = pts[:, 1:2]
    x1, y1 = vertices[:, 0], vertices[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)

    ex, ey = x2 - x1, y2 - y1
    cross = (px - x1) * ey - (py - y1) * ex
    dot = (px - x1) * ex + (py - y1) * ey
    on_edge = (np.abs(cross) <= eps) & (dot >= -eps) & (dot <= ex * ex + ey * ey + eps)

    # half-open rule on y makes vertex hits count once
    straddle = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = x1 + (py - y1) * ex / ey
    crossings = np.count_nonzero(straddle & (px < x_at), axis=1)
    return on_edge.any(axis=1) | (crossings % 2 == 1)


@dataclass
class ConfidentMovingRegion:
    frame_index: int
    polygons: list[np.ndarray] = field(default_factory=list)
    source_mask_area: int = 0

    def __post_init__(self) -> None:
        self._boxes = [
            (p[:, 0].min(), p[:, 1].min(), p[:, 0].max(), p[:, 1].max()) for p in self.polygons
        ]

    def __len__(self) -> int:
        return len(self.polygons)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership for an (N, 2) array of (x, y) points."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        inside = np.zeros(len(pts), dtype=bool)
        for poly, (x0, y0, x1, y1) in zip(self.polygons, self._boxes):
            near = (~inside & (pts[:, 0] >= x0) & (pts[:, 0] <= x1)
                    & (pts[:, 1] >= y0) & (pts[:, 1] <= y1))
            if near.any():
                inside[near] = points_in_polygon(pts[near], poly)
        return inside

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "polygons": [poly.tolist() for poly in self.polygons],
        }


def point_in_region(point, cmr: ConfidentMovingRegion) -> bool:
    return bool(cmr.contains(np.asarray(point, dtype=np.float64).reshape(1, 2))[0])


def extract_regions(mask: np.ndarray, min_area: int = 9, frame_index: int = 0) -> ConfidentMovingRegion:
    """Outline every 8-connected foreground blob with at least ``min_area`` pixels."""
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT)
    polygons = []
    if n:
        sizes = np.bincount(labels.ravel(), minlength=n + 1)
        for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
            if sl is None or sizes[lab] < min_area:
                continue
            verts = trace_outer_boundary(labels[sl] == lab)
            verts[:, 0] += sl[1].start
            verts[:, 1] += sl[0].start
            polygons.append(verts)
    return ConfidentMovingRegion(frame_index, polygons, int(mask.sum()))


def regions_for_video(masks: np.ndarray, min_area: int = 9) -> list[ConfidentMovingRegion]:
    return [extract_regions(m, min_area, t) for t, m in enumerate(masks)]
