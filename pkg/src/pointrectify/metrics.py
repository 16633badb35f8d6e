"""Average Jaccard for point tracks, as used by TAP-Vid.

For a distance threshold ``delta`` every evaluated (point, frame) pair is
classified as

* true positive: both visible and ``|pred - gt| <= delta``,
* false negative: gt visible, and the prediction is occluded or too far,
* false positive: prediction visible, and gt is occluded or too far,

and the Jaccard is ``TP / (TP + FN + FP)`` (1 when nothing is countable).
A video's AJ is the mean over thresholds of the Jaccard pooled over all its
pairs; a dataset's AJ is the unweighted mean over videos.

Distances are measured after rescaling both tracks to the evaluation
resolution (256 x 256 by default).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InputError
from .tracks import TrackSet

GROUPS = ("static", "moving", "all")


@dataclass(frozen=True)
class AJConfig:
    thresholds: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    resolution: tuple[int, int] = (256, 256)
    # "strided": every frame; "first": frames after the query only
    query_mode: str = "strided"
    include_query_frame: bool = True

    def __post_init__(self) -> None:
        th = tuple(float(t) for t in self.thresholds)
        if not th or any(t <= 0 for t in th) or list(th) != sorted(th):
            raise ValueError("thresholds must be positive and ascending")
        object.__setattr__(self, "thresholds", th)
        if self.query_mode not in ("strided", "first"):
            raise ValueError(f"unknown query_mode {self.query_mode!r}")

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "resolution": list(self.resolution),
            "query_mode": self.query_mode,
            "include_query_frame": self.include_query_frame,
        }


@dataclass
class AJResult:
    per_threshold_jaccard: list[float]
    aj: float
    group_aj: dict[str, float | None] = field(default_factory=dict)
    per_video_aj: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_threshold_jaccard": list(self.per_threshold_jaccard),
            "aj": self.aj,
            "group_aj": dict(self.group_aj),
            "per_video_aj": dict(self.per_video_aj),
        }


def _as_arrays(tracks) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(tracks, TrackSet):
        return tracks.positions(), tracks.visibility()
    xy, vis = tracks
    return np.asarray(xy, dtype=np.float64), np.asarray(vis, dtype=bool)


def jaccard_at(pred, gt, delta: float, evaluate: np.ndarray | None = None) -> float:
    """Jaccard at one threshold.

    ``pred`` and ``gt`` are `TrackSet`s or ``(xy, visible)`` pairs shaped
    ``(N, T, 2)`` / ``(N, T)``.  ``evaluate`` optionally restricts the pairs.
    """
    pxy, pvis = _as_arrays(pred)
    gxy, gvis = _as_arrays(gt)
    if pxy.shape != gxy.shape or pvis.shape != gvis.shape or pvis.shape != pxy.shape[:2]:
        raise InputError(f"prediction grid {pvis.shape} does not match ground truth {gvis.shape}")
    if evaluate is None:
        evaluate = np.ones(gvis.shape, dtype=bool)
    close = np.linalg.norm(pxy - gxy, axis=-1) <= delta
    tp = np.count_nonzero(evaluate & gvis & pvis & close)
    fn = np.count_nonzero(evaluate & gvis & ~(pvis & close))
    fp = np.count_nonzero(evaluate & pvis & ~(gvis & close))
    denom = tp + fn + fp
    return 1.0 if denom == 0 else tp / denom


def evaluation_mask(gt: TrackSet, cfg: AJConfig = AJConfig()) -> np.ndarray:
    n, t = len(gt), gt.num_frames
    frames = np.arange(t)[None, :]
    q = np.array([traj.query.frame for traj in gt], dtype=int).reshape(n, 1)
    if cfg.query_mode == "first":
        keep = frames > q
    else:
        keep = np.ones((n, t), dtype=bool)
    if cfg.include_query_frame:
        keep |= frames == q
    else:
        keep &= frames != q
    return keep


def _rescaled(tracks: TrackSet, cfg: AJConfig) -> tuple[np.ndarray, np.ndarray]:
    xy = tracks.positions()
    w, h = tracks.resolution
    ew, eh = cfg.resolution
    if (w, h) != (ew, eh):
        xy = xy * np.array([ew / w, eh / h])
    return xy, tracks.visibility()


def video_jaccards(pred: TrackSet, gt: TrackSet, cfg: AJConfig = AJConfig()) -> np.ndarray:
    if len(pred) != len(gt) or pred.num_frames != gt.num_frames:
        raise InputError(
            f"{pred.video_id}: prediction has {len(pred)} points x {pred.num_frames} frames, "
            f"ground truth {len(gt)} x {gt.num_frames}"
        )
    mask = evaluation_mask(gt, cfg)
    p, g = _rescaled(pred, cfg), _rescaled(gt, cfg)
    return np.array([jaccard_at(p, g, d, mask) for d in cfg.thresholds])


def average_jaccard(preds: Mapping[str, TrackSet] | TrackSet, gts: Mapping[str, TrackSet] | TrackSet,
                    cfg: AJConfig = AJConfig(),
                    camera_labels: Mapping[str, int] | None = None) -> AJResult:
    """Dataset AJ.  ``camera_labels`` maps video id to 0 (static) / 1 (moving)."""
    if isinstance(preds, TrackSet):
        preds = {preds.video_id: preds}
    if isinstance(gts, TrackSet):
        gts = {gts.video_id: gts}
    if not preds:
        raise InputError("no predictions to evaluate")
    per_video = {}
    per_thresh = []
    for vid in sorted(preds):
        if vid not in gts:
            raise InputError(f"missing ground truth for video {vid!r}")
        js = video_jaccards(preds[vid], gts[vid], cfg)
        per_thresh.append(js)
        per_video[vid] = float(js.mean())

    groups: dict[str, float | None] = {"all": float(np.mean(list(per_video.values())))}
    labels = camera_labels or {}
    for name, value in (("static", 0), ("moving", 1)):
        members = [aj for vid, aj in per_video.items() if vid in labels and int(labels[vid]) == value]
        groups[name] = float(np.mean(members)) if members else None

    return AJResult(
        per_threshold_jaccard=[float(v) for v in np.mean(per_thresh, axis=0)],
        aj=groups["all"],
        group_aj={g: groups[g] for g in GROUPS},
        per_video_aj=per_video,
    )
