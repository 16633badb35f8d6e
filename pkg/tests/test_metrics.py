import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_tracks
from pointrectify.errors import InputError
from pointrectify.metrics import AJConfig, average_jaccard, evaluation_mask, jaccard_at
from pointrectify.tracks import QueryPoint

THRESHOLDS = (1.0, 2.0, 4.0, 8.0, 16.0)


def brute_jaccard(pxy, pvis, gxy, gvis, delta):
    tp = fn = fp = 0
    for i in range(len(gvis)):
        for t in range(len(gvis[i])):
            d = math.hypot(pxy[i][t][0] - gxy[i][t][0], pxy[i][t][1] - gxy[i][t][1])
            g, p = bool(gvis[i][t]), bool(pvis[i][t])
            if g and p and d <= delta:
                tp += 1
                continue
            if g:
                fn += 1
            if p:
                fp += 1
    return 1.0 if tp + fn + fp == 0 else tp / (tp + fn + fp)


def random_instance(rng):
    n, t = rng.integers(1, 4), rng.integers(1, 6)
    gxy = rng.uniform(0, 40, (n, t, 2))
    # integer offsets hit the <= boundary exactly now and then
    off = np.where(rng.random((n, t, 1)) < 0.3, rng.integers(-8, 9, (n, t, 2)), rng.normal(0, 6, (n, t, 2)))
    return gxy + off, rng.random((n, t)) < 0.7, gxy, rng.random((n, t)) < 0.7


def test_brute_force_oracle():
    rng = np.random.default_rng(0)
    for _ in range(500):
        pxy, pvis, gxy, gvis = random_instance(rng)
        for d in THRESHOLDS:
            assert jaccard_at((pxy, pvis), (gxy, gvis), d) == brute_jaccard(pxy, pvis, gxy, gvis, d)


def test_hand_case_three_pixels():
    gt = make_tracks([[[10.0, 10.0]]], [[True]])
    pred = make_tracks([[[13.0, 10.0]]], [[True]])
    js = [jaccard_at(pred, gt, d) for d in THRESHOLDS]
    assert js == [0.0, 0.0, 1.0, 1.0, 1.0]
    assert average_jaccard(pred, gt).aj == pytest.approx(0.6, abs=1e-12)


def test_perfect_and_displaced():
    rng = np.random.default_rng(1)
    xy = rng.uniform(20, 200, (4, 6, 2))
    vis = np.ones((4, 6), bool)
    gt = make_tracks(xy, vis)
    assert average_jaccard(gt, gt).aj == 1.0
    far = make_tracks(xy + [20.0, 0.0], vis)
    assert all(jaccard_at(far, gt, d) == 0.0 for d in THRESHOLDS)


def test_nothing_visible_is_one():
    z = (np.zeros((2, 3, 2)), np.zeros((2, 3), bool))
    assert jaccard_at(z, z, 1.0) == 1.0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_monotone_in_delta_and_swap_symmetric(seed):
    pxy, pvis, gxy, gvis = random_instance(np.random.default_rng(seed))
    js = [jaccard_at((pxy, pvis), (gxy, gvis), d) for d in THRESHOLDS]
    assert all(a <= b for a, b in zip(js, js[1:]))
    assert js == [jaccard_at((gxy, gvis), (pxy, pvis), d) for d in THRESHOLDS]


def test_ordering_invariance():
    rng = np.random.default_rng(2)
    pxy, pvis, gxy, gvis = random_instance(rng)
    perm = rng.permutation(len(gxy))
    a = average_jaccard(make_tracks(pxy, pvis), make_tracks(gxy, gvis)).aj
    b = average_jaccard(make_tracks(pxy[perm], pvis[perm]), make_tracks(gxy[perm], gvis[perm])).aj
    assert a == b


def test_unweighted_mean_and_groups():
    xy = np.full((1, 2, 2), 50.0)
    vis = np.ones((1, 2), bool)
    gts = {"a": make_tracks(xy, vis, video_id="a"), "b": make_tracks(xy, vis, video_id="b")}
    # many points in "b" should not outweigh "a"
    gts["b"] = make_tracks(np.full((9, 2, 2), 50.0), np.ones((9, 2), bool), video_id="b")
    preds = {"a": gts["a"], "b": make_tracks(np.full((9, 2, 2), 90.0), np.ones((9, 2), bool), video_id="b")}
    res = average_jaccard(preds, gts, camera_labels={"a": 0, "b": 1})
    assert res.aj == 0.5
    assert res.group_aj == {"static": 1.0, "moving": 0.0, "all": 0.5}
    assert res.per_video_aj == {"a": 1.0, "b": 0.0}
    assert res.aj == pytest.approx(np.mean(res.per_threshold_jaccard))
    assert average_jaccard(preds, gts).group_aj["static"] is None


def test_rescaling_to_evaluation_resolution():
    gt = make_tracks([[[10.0, 10.0]]], [[True]], resolution=(128, 128))
    pred = make_tracks([[[11.0, 10.0]]], [[True]], resolution=(128, 128))
    # 1 px at 128 is 2 px at 256
    assert jaccard_at(pred, gt, 1.0) == 1.0
    assert average_jaccard(pred, gt).per_threshold_jaccard == [0.0, 1.0, 1.0, 1.0, 1.0]


def test_evaluation_mask_modes():
    xy = np.zeros((2, 5, 2))
    gt = make_tracks(xy, np.ones((2, 5), bool), queries=[QueryPoint(0, 0.0, 0.0), QueryPoint(2, 0.0, 0.0)])
    assert evaluation_mask(gt).all()
    m = evaluation_mask(gt, AJConfig(include_query_frame=False))
    assert m.tolist() == [[False, True, True, True, True], [True, True, False, True, True]]
    m = evaluation_mask(gt, AJConfig(query_mode="first"))
    assert m.tolist() == [[True] * 5, [False, False, True, True, True]]
    m = evaluation_mask(gt, AJConfig(query_mode="first", include_query_frame=False))
    assert m.tolist() == [[False, True, True, True, True], [False, False, False, True, True]]


def test_errors():
    a = make_tracks(np.zeros((1, 3, 2)), np.ones((1, 3), bool))
    b = make_tracks(np.zeros((1, 4, 2)), np.ones((1, 4), bool))
    with pytest.raises(InputError):
        jaccard_at(a, b, 1.0)
    with pytest.raises(InputError):
        average_jaccard(a, b)
    with pytest.raises(InputError):
        average_jaccard({"x": a}, {"y": a})
    with pytest.raises(InputError):
        average_jaccard({}, {})
    with pytest.raises(ValueError):
        AJConfig(thresholds=(2.0, 1.0))
    with pytest.raises(ValueError):
        AJConfig(query_mode="middle")
