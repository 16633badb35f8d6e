import sys
import numpy as np
import pytest

from pointrectify.tracks import QueryPoint, TrackSet, Trajectory


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_tracks(xy, visible, queries=None, video_id="v", resolution=(256, 256)):
    xy = np.asarray(xy, dtype=float)
    visible = np.asarray(visible, dtype=bool)
    trajs = []
    for k in range(len(xy)):
        q = queries[k] if queries is not None else QueryPoint(0, float(xy[k, 0, 0]), float(xy[k, 0, 1]))
        trajs.append(Trajectory(q, xy[k], visible[k]))
    return TrackSet(video_id, resolution, xy.shape[1], trajs)


def hole_free_mask(rng, shape=(24, 24), blobs=4):
    """Random union of blobs with every hole filled (background 4-connected)."""
    from scipy import ndimage

    mask = np.zeros(shape, dtype=bool)
    for _ in range(rng.integers(0, blobs + 1)):
        kind = rng.integers(3)
        if kind == 0:  # rectangle
            r, c = rng.integers(0, shape[0]), rng.integers(0, shape[1])
            mask[r:r + rng.integers(1, 8), c:c + rng.integers(1, 8)] = True
        elif kind == 1:  # random walk
            r, c = rng.integers(0, shape[0]), rng.integers(0, shape[1])
            for _ in range(rng.integers(1, 40)):
                mask[r, c] = True
                r = int(np.clip(r + rng.integers(-1, 2), 0, shape[0] - 1))
                c = int(np.clip(c + rng.integers(-1, 2), 0, shape[1] - 1))
        else:  # speckle
            mask |= rng.random(shape) < 0.04
    return ndimage.binary_fill_holes(mask)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
