"""Correction of base-tracker trajectories in static-camera videos.

Four policies, from no correction to the per-frame one:

``passthrough``
    Leave every trajectory untouched.
``cmd``
    Snap every trajectory to its query position (the static baseline).
``cmr_global``
    Keep a trajectory whose prediction falls inside the moving region on at
    least one frame; snap all others.
``cmr_temporary``
    Decide frame by frame: keep the prediction where it lies inside that
    frame's moving region, otherwise use the query position.

Videos shot by a moving camera are never corrected.  Visibility flags always
come from the base tracker.
"""
from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InputError
from .region import ConfidentMovingRegion
from .tracks import QueryPoint, Trajectory


class RectifyMode(str, Enum):
    PASSTHROUGH = "passthrough"
    CMD = "cmd"
    CMR_GLOBAL = "cmr_global"
    CMR_TEMPORARY = "cmr_temporary"

    def __str__(self) -> str:
        return self.value


def static_baseline(query: QueryPoint, num_frames: int) -> Trajectory:
    if num_frames < 1:
        raise ValueError("num_frames must be >= 1")
    xy = np.tile([query.x, query.y], (num_frames, 1)).astype(np.float64)
    return Trajectory(query, xy, np.ones(num_frames, dtype=bool))


def membership(traj: Trajectory, cmrs: Sequence[ConfidentMovingRegion]) -> np.ndarray:
    """Per-frame flag: is the prediction at frame t inside cmr(t)?"""
    return membership_matrix(traj.xy[None], cmrs)[0]


def membership_matrix(xy: np.ndarray, cmrs: Sequence[ConfidentMovingRegion]) -> np.ndarray:
    """(N, T) membership for stacked (N, T, 2) predictions, one region test per frame."""
    n, t = xy.shape[:2]
    if len(cmrs) != t:
        raise InputError(f"{len(cmrs)} regions for {t}-frame trajectories")
    inside = np.zeros((n, t), dtype=bool)
    for k, cmr in enumerate(cmrs):
        if n and len(cmr):
            inside[:, k] = cmr.contains(xy[:, k])
    return inside


def is_moving_point(traj: Trajectory, cmrs: Sequence[ConfidentMovingRegion]) -> bool:
    return bool(membership(traj, cmrs).any())


def _snap(traj: Trajectory, keep: np.ndarray) -> Trajectory:
    xy = np.where(keep[:, None], traj.xy, [traj.query.x, traj.query.y])
    return Trajectory(traj.query, xy, traj.visible.copy())


def _apply(traj: Trajectory, inside: np.ndarray | None, mode: RectifyMode) -> Trajectory:
    if mode is RectifyMode.PASSTHROUGH:
        return traj.copy()
    if mode is RectifyMode.CMD:
        return _snap(traj, np.zeros(traj.num_frames, dtype=bool))
    if inside is None:
        raise InputError(f"mode {mode} needs per-frame moving regions")
    if mode is RectifyMode.CMR_GLOBAL:
        return traj.copy() if inside.any() else _snap(traj, inside)
    return _snap(traj, inside)


def rectify_trajectory(traj: Trajectory, cmrs: Sequence[ConfidentMovingRegion] | None,
                       mode: RectifyMode | str) -> Trajectory:
    mode = RectifyMode(mode)
    needs_regions = mode in (RectifyMode.CMR_GLOBAL, RectifyMode.CMR_TEMPORARY)
    inside = membership(traj, cmrs) if needs_regions and cmrs is not None else None
    return _apply(traj, inside, mode)


def rectify_video(trajs: Sequence[Trajectory], moving_camera: bool | int,
                  cmrs: Sequence[ConfidentMovingRegion] | None,
                  mode: RectifyMode | str,
                  scale: tuple[float, float] = (1.0, 1.0)) -> list[Trajectory]:
    """Apply ``mode`` to every trajectory of one video.

    ``scale`` maps trajectory coordinates to the pixel grid of the regions
    when the two resolutions differ.
    """
    mode = RectifyMode(mode)
    lengths = {t.num_frames for t in trajs}
    if len(lengths) > 1:
        raise InputError("trajectories of one video differ in length")
    if moving_camera or mode is RectifyMode.PASSTHROUGH or not trajs:
        return [t.copy() for t in trajs]
    inside = None
    if mode in (RectifyMode.CMR_GLOBAL, RectifyMode.CMR_TEMPORARY):
        if cmrs is None:
            raise InputError(f"mode {mode} needs per-frame moving regions")
        inside = membership_matrix(np.stack([t.xy for t in trajs]) * np.asarray(scale), cmrs)
    return [_apply(t, None if inside is None else inside[k], mode) for k, t in enumerate(trajs)]
