"""Synthetic scenes with known point tracks, and a degraded "base tracker".

A scene is a (possibly textured) background viewed by a static or panning
camera, with flat-shaded rectangles/disks moving over it.  Ground-truth
tracks are produced for points on the background (static in the world) and
on the objects.  `degrade` then imitates two failure modes of learned point
trackers on such footage: small positional jitter, and static points that
latch on to an object passing over them.

Coordinates follow the pixel-centre convention: pixel ``(row, col)`` is
centred at ``(x=col, y=row)``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import InputError
from .tracks import QueryPoint, TrackSet, Trajectory, save_trajectories
from .video_io import VideoSequence, save_frames


@dataclass
class ObjectSpec:
    shape: str = "rect"  # "rect" or "disk"
    size: tuple[float, float] = (10.0, 10.0)  # (w, h); disks use size[0] as diameter
    start: tuple[float, float] = (32.0, 32.0)  # centre at frame 0
    path: str = "linear"  # "linear" or "sinusoidal"
    velocity: tuple[float, float] = (1.0, 0.0)  # px/frame, or amplitude for sinusoidal
    period: float = 40.0  # frames, sinusoidal only
    intensity: float = 200.0

    def centre(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)[..., None]
        v = np.asarray(self.velocity, dtype=np.float64)
        if self.path == "linear":
            disp = v * t
        elif self.path == "sinusoidal":
            disp = v * np.sin(2 * np.pi * t / self.period)
        else:
            raise InputError(f"unknown path {self.path!r}")
        return np.asarray(self.start, dtype=np.float64) + disp

    def covers(self, centre: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        dx = x - centre[0]
        dy = y - centre[1]
        if self.shape == "rect":
            w, h = self.size
            return (dx >= -w / 2) & (dx < w / 2) & (dy >= -h / 2) & (dy < h / 2)
        if self.shape == "disk":
            r = self.size[0] / 2
            return dx * dx + dy * dy <= r * r
        raise InputError(f"unknown shape {self.shape!r}")


@dataclass
class SceneSpec:
    resolution: tuple[int, int] = (64, 64)  # (width, height)
    num_frames: int = 48
    fps: float = 10.0
    background_level: float = 100.0
    noise_sigma: float = 2.0
    texture_std: float = 0.0
    texture_scale: float = 1.0
    objects: list[ObjectSpec] = field(default_factory=list)
    camera_pan: tuple[float, float] = (0.0, 0.0)
    background_points: int = 20
    points_per_object: int = 5
    seed: int = 0
    video_id: str = "synthetic"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DegradationSpec:
    jitter_sigma: float = 0.0
    pseudo_follow: float = 0.0
    drag: tuple[float, float] = (0.0, 0.0)  # extra px/frame drift once latched
    seed: int = 0

    def __post_init__(self) -> None:
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be >= 0")
        if not 0.0 <= self.pseudo_follow <= 1.0:
            raise ValueError("pseudo_follow must lie in [0, 1]")


@dataclass
class SyntheticScene:
    spec: SceneSpec
    video: VideoSequence
    gt: TrackSet
    camera_label: int
    object_centres: np.ndarray  # (K, T, 2) in image coordinates
    point_owner: np.ndarray  # (N,) object index, -1 for background points

    def occluder(self, t: int, x: float, y: float) -> int:
        """Index of the topmost object covering (x, y) at frame t, or -1."""
        for k in range(len(self.spec.objects) - 1, -1, -1):
            if self.spec.objects[k].covers(self.object_centres[k, t], np.float64(x), np.float64(y)):
                return k
        return -1

    def object_masks(self, t: int) -> np.ndarray:
        """(K, H, W) pixel coverage of each object at frame t."""
        w, h = self.spec.resolution
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        return np.stack([o.covers(self.object_centres[k, t], xx, yy)
                         for k, o in enumerate(self.spec.objects)]) if self.spec.objects \
            else np.zeros((0, h, w), dtype=bool)


def _camera_offsets(spec: SceneSpec) -> np.ndarray:
    t = np.arange(spec.num_frames, dtype=np.float64)[:, None]
    return t * np.asarray(spec.camera_pan, dtype=np.float64)


def _texture(spec: SceneSpec, rng: np.random.Generator, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """World background canvas and the world coordinate of image pixel (0, 0)."""
    w, h = spec.resolution
    lo = np.floor(offsets.min(axis=0)) - 2
    hi = np.ceil(offsets.max(axis=0)) + 2
    cw = int(w + hi[0] - lo[0])
    ch = int(h + hi[1] - lo[1])
    canvas = np.full((ch, cw), spec.background_level, dtype=np.float64)
    if spec.texture_std > 0:
        field_ = rng.normal(size=(ch, cw))
        if spec.texture_scale > 0:
            field_ = ndimage.gaussian_filter(field_, spec.texture_scale, mode="wrap")
        field_ *= spec.texture_std / field_.std()
        canvas += field_
    return canvas, -lo


def render(spec: SceneSpec) -> SyntheticScene:
    """Render frames and ground-truth tracks for ``spec``; deterministic in ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    w, h = spec.resolution
    n_frames = spec.num_frames
    if n_frames < 1:
        raise InputError("num_frames must be >= 1")
    frames_t = np.arange(n_frames)
    offsets = _camera_offsets(spec)
    moving_camera = int(any(v != 0 for v in spec.camera_pan))

    centres = np.stack([o.centre(frames_t) for o in spec.objects]) if spec.objects \
        else np.zeros((0, n_frames, 2))
    img_centres = centres - offsets[None]
    if not moving_camera:
        for k, o in enumerate(spec.objects):
            half = np.array(o.size if o.shape == "rect" else (o.size[0], o.size[0])) / 2
            lo = img_centres[k] - half
            hi = img_centres[k] + half
            if (lo < -0.5).any() or (hi[:, 0] > w - 0.5).any() or (hi[:, 1] > h - 0.5).any():
                raise InputError(f"object {k} leaves the frame")

    canvas, origin = _texture(spec, rng, offsets)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)

    frames = np.empty((n_frames, h, w), dtype=np.uint8)
    for t in range(n_frames):
        ox, oy = origin + offsets[t]
        if float(ox).is_integer() and float(oy).is_integer():
            img = canvas[int(oy):int(oy) + h, int(ox):int(ox) + w].copy()
        else:
            img = ndimage.map_coordinates(canvas, [yy + oy, xx + ox], order=1, mode="nearest")
        for k, o in enumerate(spec.objects):
            img[o.covers(img_centres[k, t], xx, yy)] = o.intensity
        if spec.noise_sigma > 0:
            img = img + rng.normal(0.0, spec.noise_sigma, size=img.shape)
        frames[t] = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)

    scene = SyntheticScene(
        spec=spec,
        video=VideoSequence(frames, spec.fps, spec.video_id, {"camera_label": moving_camera}),
        gt=TrackSet(spec.video_id, (w, h), n_frames, []),
        camera_label=moving_camera,
        object_centres=img_centres,
        point_owner=np.zeros(0, dtype=int),
    )

    trajs: list[Trajectory] = []
    owners: list[int] = []
    # background points: uncovered at frame 0, world-static
    tries = 0
    while sum(1 for o in owners if o < 0) < spec.background_points:
        tries += 1
        if tries > 1000 * max(spec.background_points, 1):
            raise InputError("could not place background points; objects cover the frame")
        x0 = rng.uniform(1, w - 2)
        y0 = rng.uniform(1, h - 2)
        if scene.occluder(0, x0, y0) >= 0:
            continue
        xy = np.array([x0, y0]) - (offsets - offsets[0])
        trajs.append(Trajectory(QueryPoint(0, float(x0), float(y0)), xy,
                                _visibility(scene, xy, -1)))
        owners.append(-1)

    for k, o in enumerate(spec.objects):
        placed = 0
        tries = 0
        while placed < spec.points_per_object:
            tries += 1
            if tries > 1000 * spec.points_per_object:
                raise InputError(f"could not place points on object {k}")
            # stay off the outline so the point is unambiguously on the object
            off = rng.uniform(-0.35, 0.35, size=2) * np.array(o.size if o.shape == "rect"
                                                             else (o.size[0], o.size[0]))
            start = img_centres[k, 0] + off
            if scene.occluder(0, *start) != k:
                continue
            xy = img_centres[k] + off
            trajs.append(Trajectory(QueryPoint(0, float(start[0]), float(start[1])), xy,
                                    _visibility(scene, xy, k)))
            owners.append(k)
            placed += 1

    scene.gt = TrackSet(spec.video_id, (w, h), n_frames, trajs)
    scene.point_owner = np.asarray(owners, dtype=int)
    return scene


def _visibility(scene: SyntheticScene, xy: np.ndarray, owner: int) -> np.ndarray:
    w, h = scene.spec.resolution
    vis = (xy[:, 0] >= 0) & (xy[:, 0] <= w - 1) & (xy[:, 1] >= 0) & (xy[:, 1] <= h - 1)
    for t in range(len(xy)):
        if vis[t]:
            top = scene.occluder(t, xy[t, 0], xy[t, 1])
            vis[t] = top == owner if owner >= 0 else top < 0
    return vis


def degrade(gt: TrackSet, spec: DegradationSpec, scene: SyntheticScene | None = None) -> TrackSet:
    """Imitate a base tracker's errors on ground-truth tracks.

    Every frame except the query frame gets i.i.d. N(0, jitter_sigma^2) noise
    per axis.  With probability ``pseudo_follow`` a background point that gets
    covered by an object copies that object's motion from the first covered
    frame on (plus ``drag`` px/frame).  Pseudo-following needs ``scene``.
    Visibility flags are copied from ``gt``.
    """
    rng = np.random.default_rng(spec.seed)
    out = []
    drag = np.asarray(spec.drag, dtype=np.float64)
    for idx, traj in enumerate(gt):
        xy = traj.xy.copy()
        q = traj.query.frame
        follow = spec.pseudo_follow > 0 and scene is not None and scene.point_owner[idx] < 0
        if follow:
            hidden = np.flatnonzero(~traj.visible[q:]) + q
            # occlusion by an object, not by leaving the frame
            hidden = [t for t in hidden if scene.occluder(t, *traj.xy[t]) >= 0]
            latch = rng.random() < spec.pseudo_follow
            if hidden and latch:
                t0 = hidden[0]
                k = scene.occluder(t0, *traj.xy[t0])
                steps = np.arange(len(xy) - t0)[:, None]
                xy[t0:] = (traj.xy[t0] + scene.object_centres[k, t0:] - scene.object_centres[k, t0]
                           + steps * drag)
        if spec.jitter_sigma > 0:
            noise = rng.normal(0.0, spec.jitter_sigma, size=xy.shape)
            noise[q] = 0.0
            xy = xy + noise
        out.append(Trajectory(traj.query, xy, traj.visible.copy()))
    return gt.replace(out)


def random_scene_spec(seed: int, *, pan: tuple[float, float] = (0.0, 0.0),
                      resolution: tuple[int, int] = (128, 128), num_frames: int = 60,
                      fps: float = 10.0, n_objects: int = 2, texture_std: float = 25.0,
                      background_points: int = 60, points_per_object: int = 8,
                      video_id: str | None = None) -> SceneSpec:
    """A scene with ``n_objects`` objects sweeping back and forth across the frame."""
    rng = np.random.default_rng(seed)
    w, h = resolution
    objects = []
    for _ in range(n_objects):
        shape = str(rng.choice(["rect", "disk"]))
        side = float(rng.uniform(0.12, 0.2) * min(w, h))
        size = (side, float(rng.uniform(0.8, 1.2) * side)) if shape == "rect" else (side, side)
        speed = rng.uniform(2.0, 3.5)
        # keep centre +/- amplitude inside the frame
        margin = np.array(size) / 2 + 2
        mid = np.array([w, h]) / 2
        # start positions must not overlap so every object is visible at frame 0
        for _ in range(100):
            centre = mid + rng.uniform(-0.25, 0.25, 2) * np.array([w, h])
            if all(np.any(np.abs(centre - np.array(o.start)) > (np.array(size) + np.array(o.size)) / 2 + 1)
                   for o in objects):
                break
        angle = rng.uniform(0, 2 * np.pi)
        direction = np.array([np.cos(angle), np.sin(angle)])
        slack = mid - margin - np.abs(centre - mid)
        with np.errstate(divide="ignore"):
            amplitude = 0.95 * max(float(np.min(slack / np.abs(direction))), 1.0)
        period = float(2 * np.pi * amplitude / speed)
        objects.append(ObjectSpec(
            shape=shape,
            size=size,
            start=(float(centre[0]), float(centre[1])),
            path="sinusoidal",
            velocity=(float(direction[0] * amplitude), float(direction[1] * amplitude)),
            period=period,
            intensity=float(rng.choice([20.0, 200.0]) + rng.uniform(-10, 10)),
        ))
    return SceneSpec(
        resolution=resolution,
        num_frames=num_frames,
        fps=fps,
        texture_std=texture_std,
        texture_scale=1.0,
        objects=objects,
        camera_pan=pan,
        background_points=background_points,
        points_per_object=points_per_object,
        seed=seed,
        video_id=video_id or f"synth{seed:03d}",
    )


def write_scene(scene: SyntheticScene, directory: str | Path,
                base: TrackSet | None = None) -> dict[str, Path]:
    """Write frames + manifest, ``gt.json`` and optionally ``tracks.json``."""
    directory = Path(directory)
    manifest = save_frames(scene.video, directory / "frames",
                           extra={"camera_label": scene.camera_label})
    paths = {"manifest": manifest, "gt": directory / "gt.json"}
    save_trajectories(paths["gt"], scene.gt)
    if base is not None:
        paths["tracks"] = directory / "tracks.json"
        save_trajectories(paths["tracks"], base)
    (directory / "scene.json").write_text(json.dumps(scene.spec.to_dict(), indent=1) + "\n")
    return paths


def scene_suite(seeds: Sequence[int], pan: tuple[float, float] = (0.0, 0.0), **kwargs) -> list[SyntheticScene]:
    return [render(random_scene_spec(s, pan=pan, **kwargs)) for s in seeds]
