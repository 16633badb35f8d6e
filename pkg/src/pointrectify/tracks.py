"""Point trajectories and their JSON file format.

File layout (predictions and ground truth share it)::

    {"video_id": "v0", "resolution": [256, 256], "num_frames": 48,
     "points": [{"query": {"frame": 0, "x": 12.0, "y": 40.5},
                 "track": [{"frame": 0, "x": 12.0, "y": 40.5, "visible": true}, ...]}]}
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InputError


class QueryPoint(NamedTuple):
    frame: int
    x: float
    y: float


class TrackPoint(NamedTuple):
    frame: int
    x: float
    y: float
    visible: bool


@dataclass
class Trajectory:
    query: QueryPoint
    xy: np.ndarray  # (T, 2) float64, x then y
    visible: np.ndarray  # (T,) bool

    def __post_init__(self) -> None:
        self.xy = np.asarray(self.xy, dtype=np.float64).reshape(-1, 2)
        self.visible = np.asarray(self.visible, dtype=bool).reshape(-1)
        if len(self.xy) != len(self.visible):
            raise InputError("positions and visibility flags differ in length")
        if not 0 <= self.query.frame < max(len(self.xy), 1):
            raise InputError(f"query frame {self.query.frame} outside track of {len(self.xy)} frames")

    @property
    def num_frames(self) -> int:
        return len(self.xy)

    @property
    def points(self) -> list[TrackPoint]:
        return [TrackPoint(t, float(x), float(y), bool(v))
                for t, ((x, y), v) in enumerate(zip(self.xy, self.visible))]

    def copy(self) -> "Trajectory":
        return Trajectory(self.query, self.xy.copy(), self.visible.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (tuple(self.query) == tuple(other.query)
                and np.array_equal(self.xy, other.xy)
                and np.array_equal(self.visible, other.visible))


@dataclass
class TrackSet:
    """All trajectories of one video."""

    video_id: str
    resolution: tuple[int, int]
    num_frames: int
    trajectories: list[Trajectory]

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories)

    def __len__(self) -> int:
        return len(self.trajectories)

    def positions(self) -> np.ndarray:
        """(N, T, 2) stacked positions."""
        if not self.trajectories:
            return np.zeros((0, self.num_frames, 2))
        return np.stack([t.xy for t in self.trajectories])

    def visibility(self) -> np.ndarray:
        if not self.trajectories:
            return np.zeros((0, self.num_frames), dtype=bool)
        return np.stack([t.visible for t in self.trajectories])

    def replace(self, trajectories: list[Trajectory]) -> "TrackSet":
        return TrackSet(self.video_id, self.resolution, self.num_frames, trajectories)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrackSet):
            return NotImplemented
        return (self.video_id == other.video_id
                and tuple(self.resolution) == tuple(other.resolution)
                and self.num_frames == other.num_frames
                and self.trajectories == other.trajectories)


def _num(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{what} must be a number, got {value!r}")
    return float(value)


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{what} must be an integer, got {value!r}")
    return value


def tracks_from_dict(doc: dict) -> TrackSet:
    if not isinstance(doc, dict):
        raise InputError("trajectory file must hold a JSON object")
    for key in ("video_id", "resolution", "num_frames", "points"):
        if key not in doc:
            raise InputError(f"trajectory file missing key {key!r}")
    res = doc["resolution"]
    if not (isinstance(res, list) and len(res) == 2):
        raise InputError("resolution must be [width, height]")
    width, height = (_int(v, "resolution") for v in res)
    n = _int(doc["num_frames"], "num_frames")
    if n < 1:
        raise InputError("num_frames must be >= 1")
    if not isinstance(doc["points"], list):
        raise InputError("points must be a list")

    trajs = []
    for k, entry in enumerate(doc["points"]):
        try:
            q = entry["query"]
            track = entry["track"]
            query = QueryPoint(_int(q["frame"], "query frame"), _num(q["x"], "query x"),
                               _num(q["y"], "query y"))
        except (KeyError, TypeError):
            raise InputError(f"point {k}: needs 'query' {{frame, x, y}} and 'track'") from None
        if not isinstance(track, list) or len(track) != n:
            got = len(track) if isinstance(track, list) else type(track).__name__
            raise InputError(f"point {k}: track has {got} entries, expected {n}")
        xy = np.empty((n, 2))
        vis = np.empty(n, dtype=bool)
        for t, p in enumerate(track):
            try:
                if _int(p["frame"], "frame") != t:
                    raise InputError(f"point {k}: track entries must be ordered frame 0..{n - 1}")
                xy[t] = (_num(p["x"], "x"), _num(p["y"], "y"))
                if not isinstance(p["visible"], bool):
                    raise InputError(f"point {k}, frame {t}: visible must be a boolean")
                vis[t] = p["visible"]
            except (KeyError, TypeError):
                raise InputError(f"point {k}, frame {t}: needs frame, x, y, visible") from None
        if not 0 <= query.frame < n:
            raise InputError(f"point {k}: query frame {query.frame} outside [0, {n})")
        trajs.append(Trajectory(query, xy, vis))
    return TrackSet(str(doc["video_id"]), (width, height), n, trajs)


def tracks_to_dict(tracks: TrackSet) -> dict:
    points = []
    for traj in tracks:
        q = traj.query
        points.append({
            "query": {"frame": int(q.frame), "x": float(q.x), "y": float(q.y)},
            "track": [{"frame": t, "x": float(x), "y": float(y), "visible": bool(v)}
                      for t, ((x, y), v) in enumerate(zip(traj.xy, traj.visible))],
        })
    return {
        "video_id": tracks.video_id,
        "resolution": [int(tracks.resolution[0]), int(tracks.resolution[1])],
        "num_frames": int(tracks.num_frames),
        "points": points,
    }


def load_trajectories(path: str | Path) -> TrackSet:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"missing trajectory file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    return tracks_from_dict(doc)


def save_trajectories(path: str | Path, tracks: TrackSet) -> None:
    Path(path).write_text(json.dumps(tracks_to_dict(tracks), separators=(",", ":")) + "\n")
